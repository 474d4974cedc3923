#pragma once

// Attack operators bound to taps: measurement and control channels of LTI
// plants, load sets, network links and breakers. Every operator is the
// identity outside its window.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cpes/cyber/network.hpp"
#include "cpes/physical/grid.hpp"
#include "cpes/rng.hpp"

namespace cpes::attack {

struct Interval {
    double start = 0.0;
    double end = 0.0;
};

/// Union of disjoint, sorted half-open intervals [start, end). Membership is
/// tested with a 1e-9 s guard so boundaries that land on a step grid point
/// after floating accumulation still resolve to that step.
struct AttackWindow {
    std::vector<Interval> intervals;

    bool contains(double t) const;
    bool empty() const { return intervals.empty(); }
};

inline constexpr double kWindowGuard = 1e-9;

/// Throws cpes::ValidationError unless start < end and intervals are sorted and disjoint.
void check(const AttackWindow& w);

struct NoNoise {};
struct GaussianNoise {
    double sigma = 0.0;
};
struct SinusoidNoise {
    double amplitude = 0.0;
    double freq_hz = 0.0;
};
using Noise = std::variant<NoNoise, GaussianNoise, SinusoidNoise>;

/// (time, value) breakpoints; the value holds until the next breakpoint.
struct Step {
    double time = 0.0;
    double value = 0.0;
};
using Schedule = std::vector<Step>;

/// Value in force at t; 0 before the first breakpoint.
double schedule_value(const Schedule& s, double t);

/// y_a = beta * y + W inside the window.
struct DiaCombined {
    std::string id;
    std::string plant;
    int channel = 0;
    double beta = 1.0;
    Noise noise;
    AttackWindow window;
};

/// u + delta_u(t) inside the window.
struct ControlDia {
    std::string id;
    std::string plant;
    int channel = 0;
    Schedule delta_u;
    AttackWindow window;
};

/// d_i + delta (absolute, pu) or d_i * (1 + delta) (fraction) inside the window.
struct LoadChange {
    std::string id;
    std::vector<std::string> targets;
    double delta = 0.0;
    bool fraction = true;
    AttackWindow window;
};

enum class PreHistory { Hold, Error };

/// On a link tap, `delay` is seconds added to each arrival whose transmit
/// starts in the window. On a signal tap ("plant:<id>:<channel>") it is an
/// integer step count.
struct TimeDelay {
    std::string id;
    std::string link;
    std::string signal;
    Schedule delay;
    AttackWindow window;
    PreHistory pre_history = PreHistory::Hold;

    bool on_link() const { return !link.empty(); }
};

/// Drops every packet whose transmit starts in the window.
struct DoS {
    std::string id;
    std::string link;
    AttackWindow window;
};

struct BreakerAttack {
    std::string id;
    std::string breaker;
    std::vector<phys::BreakerOp> schedule;
};

using AttackSpec = std::variant<DiaCombined, ControlDia, LoadChange, TimeDelay, DoS, BreakerAttack>;

const std::string& id_of(const AttackSpec& a);
std::string_view kind_of(const AttackSpec& a);

/// Parameter invariants only; tap resolution happens against a scenario.
void check(const AttackSpec& a);

double apply_dia(double y, double t, const DiaCombined& spec, Rng& rng);
double apply_control_dia(double u, double t, const ControlDia& spec);

/// Delta-d contributed by `spec` to one load at time t.
double load_delta(const phys::Load& load, double t, const LoadChange& spec);
/// Sets delta_demand on each target from this spec alone. Throws
/// cpes::ValidationError for unknown targets.
void apply_load_change(phys::GridModel& grid, double t, const LoadChange& spec);

/// history[k - d] when step k (time k*dt) is in the window, else history[k].
/// Reaching before history[0] holds history[0] or throws cpes::SimulationError
/// in Error mode. Requires k < history.size().
double apply_delay(std::span<const double> history, std::size_t k, std::size_t d_steps, const AttackWindow& window,
                   double dt, PreHistory mode = PreHistory::Hold);

cyber::LinkImpairment apply_dos(const DoS& spec);
cyber::LinkImpairment link_delay(const TimeDelay& spec);

/// Scheduled breaker mutations; throws cpes::ValidationError for unknown
/// breakers or unsorted schedules.
std::vector<phys::GridMutation> apply_breaker_attack(const phys::GridModel& grid, const BreakerAttack& spec, double dt);

}  // namespace cpes::attack
