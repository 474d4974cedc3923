#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpes/physical/lti.hpp"
#include "cpes/physical/protection.hpp"
#include "cpes/physical/state_space.hpp"
#include "cpes/physical/swing.hpp"

namespace cpes::phys {

/// Electrical coupling used to compute each machine's P_e.
enum class GridTier {
    Aggregate,  // one equivalent machine, BESS, plant injections, optional tie to a stiff grid
    CommonBus,  // N machines behind reactances feeding one constant-power bus
    Nodal,      // machines, branches and constant-admittance loads solved as Y V = I
};

std::string_view to_string(GridTier t);

struct Load {
    std::string id;
    double base_demand = 0.0;   // d_i
    double delta_demand = 0.0;  // attack-controlled increment
    bool sheddable = false;
    bool shed = false;
    std::string node;           // nodal tier only
    double power_factor = 1.0;  // nodal tier only

    double demand() const { return shed ? 0.0 : base_demand + delta_demand; }
};

struct BreakerOp {
    double time = 0.0;
    bool close = false;
};

struct Breaker {
    std::string id;
    bool closed = true;
    std::vector<BreakerOp> schedule;  // time-sorted
};

/// Battery as a fast frequency-response source: P = clamp(-gain * df, +-p_max).
struct Bess {
    double p_max = 0.0;
    double gain = 0.0;  // pu per Hz
};

/// Point of common coupling to a stiff main grid held at angle 0.
struct GridTie {
    std::string breaker;
    double reactance = 0.2;
    double v_grid = 1.0;
};

struct Branch {
    std::string from;
    std::string to;
    double r = 0.0;
    double x = 0.1;
    std::string breaker;  // empty: always in service
};

/// An LtiPlant whose state drives a power injection into the aggregate bus.
struct PlantBinding {
    LtiPlant plant;
    Eigen::Index injection_state = 0;
    double injection_scale = 0.0;
    std::optional<double> trip_low;
    std::optional<double> trip_high;
    bool tripped = false;

    double injection() const { return tripped ? 0.0 : injection_scale * plant.x[injection_state]; }
};

struct ContingencyEvent {
    double time = 0.0;
    std::string machine;
};

struct GridModel {
    GridTier tier = GridTier::CommonBus;
    double f_nom = 60.0;
    std::vector<Machine> machines;
    std::vector<Load> loads;
    double p_loss = 0.0;
    std::vector<Breaker> breakers;
    FrequencyProtection protection;
    std::vector<PlantBinding> plants;
    std::optional<Bess> bess;
    std::optional<GridTie> tie;
    std::vector<std::string> nodes;
    std::vector<Branch> branches;
    double leakage = 1e-6;  // shunt conductance at every node keeps isolated buses solvable
    std::vector<StateSpaceGroup> groups;
    std::vector<ContingencyEvent> contingencies;

    const Breaker* find_breaker(const std::string& id) const;
    Breaker* find_breaker(const std::string& id);
    std::optional<std::size_t> machine_index(const std::string& id) const;
    std::optional<std::size_t> load_index(const std::string& id) const;
    std::optional<std::size_t> plant_index(const std::string& id) const;
    std::optional<std::size_t> node_index(const std::string& id) const;
    bool breaker_closed(const std::string& id) const;  // empty id: true
};

/// Throws cpes::ValidationError naming the first broken invariant.
void check(const GridModel& g);

/// Sum of unaltered and attacked demands plus losses; shed loads contribute 0.
double demand_total(const GridModel& g);

/// A discrete change to the grid, effective at a macro-step boundary.
struct GridMutation {
    enum class Kind { DisconnectMachine, OpenBreaker, CloseBreaker, ShedLoad, RestoreLoad };
    std::size_t step = 0;
    Kind kind = Kind::OpenBreaker;
    std::string target;
    std::string source;  // "contingency", "schedule", "attack", "command"
};

std::string_view to_string(GridMutation::Kind k);

/// First macro-step index whose boundary time is >= t.
std::size_t step_at_or_after(double t, double dt);

/// Contingency events as scheduled disconnections. Disconnections are permanent.
/// Throws cpes::ValidationError for unknown machines or times outside [0, horizon].
std::vector<GridMutation> apply_contingency(const GridModel& g, const std::vector<ContingencyEvent>& events,
                                            double dt, double horizon);

/// Breaker schedule entries as mutations.
std::vector<GridMutation> breaker_schedule(const std::string& breaker, const std::vector<BreakerOp>& ops,
                                           double dt);

/// Applies a mutation; returns false if it changed nothing.
bool apply_mutation(GridModel& g, const GridMutation& m);

/// Owns a grid for one run and advances its continuous dynamics.
class PhysicalSystem {
public:
    /// Validates and, when `equilibrium` is set, trims machine dispatch and
    /// group states so the initial point is an exact equilibrium.
    explicit PhysicalSystem(GridModel grid, bool equilibrium = true);

    GridModel& grid() { return grid_; }
    const GridModel& grid() const { return grid_; }

    /// Solve the algebraic network for the current state (bus angle, nodal
    /// voltages, electrical power per machine). Call after any mutation.
    void solve(std::size_t step);

    /// Advance machines and groups by dt using the last solve.
    void advance(double dt, std::size_t step);

    double coi_frequency() const;
    double machine_pe(std::size_t i) const { return pe_[i]; }
    double machine_pm(std::size_t i) const;
    double bess_power() const { return p_bess_; }
    double tie_power() const { return p_tie_; }
    double plant_injection() const;
    double bus_angle() const { return theta_; }
    bool collapsed() const { return collapsed_; }
    const Eigen::VectorXcd& voltages() const { return v_; }
    /// Latest value of every "trace:<name>" group output.
    const std::map<std::string, double>& group_traces() const { return group_traces_; }

private:
    double net_bus_load(double omega_coi) const;
    double bess_at(double omega) const;
    double tie_at(double delta) const;
    void solve_nodal(std::size_t step);
    Eigen::VectorXd group_inputs(const StateSpaceGroup& g) const;
    void apply_group_outputs(const StateSpaceGroup& g, const Eigen::VectorXd& o);
    void initialize(bool equilibrium);

    GridModel grid_;
    std::vector<double> pe_;
    double theta_ = 0.0;
    double p_bess_ = 0.0;
    double p_tie_ = 0.0;
    bool collapsed_ = false;
    Eigen::VectorXcd v_;
    std::map<std::string, double> gscale_;
    std::map<std::string, double> group_traces_;
};

}  // namespace cpes::phys
