#include "cpes/physical/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "cpes/error.hpp"
#include "cpes/physical/nodal.hpp"

namespace cpes::phys {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class T>
std::optional<std::size_t> index_of(const std::vector<T>& v, const std::string& id) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i].id == id) return i;
    return std::nullopt;
}

template <class T>
void check_unique(const std::vector<T>& v, const char* what) {
    std::set<std::string> seen;
    for (const auto& x : v) {
        if (x.id.empty()) throw ValidationError(std::string(what) + " with empty id");
        if (!seen.insert(x.id).second) throw ValidationError(std::string("duplicate ") + what + " id: " + x.id);
    }
}

std::pair<std::string, std::string> split_port(const std::string& port) {
    const auto pos = port.find(':');
    if (pos == std::string::npos) return {port, ""};
    return {port.substr(0, pos), port.substr(pos + 1)};
}

}  // namespace

std::string_view to_string(GridTier t) {
    switch (t) {
        case GridTier::Aggregate: return "aggregate";
        case GridTier::CommonBus: return "common_bus";
        case GridTier::Nodal: return "nodal";
    }
    return "<invalid>";
}

std::string_view to_string(GridMutation::Kind k) {
    switch (k) {
        case GridMutation::Kind::DisconnectMachine: return "disconnect_machine";
        case GridMutation::Kind::OpenBreaker: return "open_breaker";
        case GridMutation::Kind::CloseBreaker: return "close_breaker";
        case GridMutation::Kind::ShedLoad: return "shed_load";
        case GridMutation::Kind::RestoreLoad: return "restore_load";
    }
    return "<invalid>";
}

const Breaker* GridModel::find_breaker(const std::string& id) const {
    auto i = index_of(breakers, id);
    return i ? &breakers[*i] : nullptr;
}

Breaker* GridModel::find_breaker(const std::string& id) {
    auto i = index_of(breakers, id);
    return i ? &breakers[*i] : nullptr;
}

std::optional<std::size_t> GridModel::machine_index(const std::string& id) const { return index_of(machines, id); }
std::optional<std::size_t> GridModel::load_index(const std::string& id) const { return index_of(loads, id); }

std::optional<std::size_t> GridModel::plant_index(const std::string& id) const {
    for (std::size_t i = 0; i < plants.size(); ++i)
        if (plants[i].plant.id == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> GridModel::node_index(const std::string& id) const {
    auto it = std::find(nodes.begin(), nodes.end(), id);
    if (it == nodes.end()) return std::nullopt;
    return static_cast<std::size_t>(it - nodes.begin());
}

bool GridModel::breaker_closed(const std::string& id) const {
    if (id.empty()) return true;
    const Breaker* b = find_breaker(id);
    return b && b->closed;
}

void check(const GridModel& g) {
    if (!(g.f_nom > 0.0)) throw ValidationError("grid: nominal frequency must be > 0");
    check(g.protection, g.f_nom);
    if (!(g.p_loss >= 0.0)) throw ValidationError("grid: p_loss must be >= 0");
    if (!(g.leakage > 0.0)) throw ValidationError("grid: leakage must be > 0");
    if (g.machines.empty()) throw ValidationError("grid: at least one machine is required");
    check_unique(g.machines, "machine");
    check_unique(g.loads, "load");
    check_unique(g.breakers, "breaker");
    check_unique(g.groups, "group");
    for (const auto& m : g.machines) check(m);
    for (const auto& l : g.loads) {
        if (!(l.base_demand >= 0.0)) throw ValidationError("load " + l.id + ": demand must be >= 0");
        if (!(l.power_factor > 0.0 && l.power_factor <= 1.0))
            throw ValidationError("load " + l.id + ": power factor must lie in (0, 1]");
    }
    for (const auto& b : g.breakers) {
        double last = 0.0;
        for (const auto& op : b.schedule) {
            if (!(op.time >= last)) throw ValidationError("breaker " + b.id + ": schedule must be time-sorted and >= 0");
            last = op.time;
        }
    }
    std::set<std::string> plant_ids;
    for (const auto& p : g.plants) {
        check(p.plant);
        if (!plant_ids.insert(p.plant.id).second) throw ValidationError("duplicate plant id: " + p.plant.id);
        if (p.injection_state < 0 || p.injection_state >= p.plant.n())
            throw ValidationError("plant " + p.plant.id + ": injection state out of range");
        if (p.trip_low && p.trip_high && !(*p.trip_low < *p.trip_high))
            throw ValidationError("plant " + p.plant.id + ": trip band must satisfy low < high");
    }
    for (const auto& c : g.contingencies)
        if (!g.machine_index(c.machine)) throw ValidationError("contingency names unknown machine: " + c.machine);

    switch (g.tier) {
        case GridTier::Aggregate:
            if (g.machines.size() != 1) throw ValidationError("aggregate tier takes exactly one machine");
            if (g.tie) {
                if (!(g.tie->reactance > 0.0)) throw ValidationError("grid tie reactance must be > 0");
                if (!g.tie->breaker.empty() && !g.find_breaker(g.tie->breaker))
                    throw ValidationError("grid tie names unknown breaker: " + g.tie->breaker);
            }
            break;
        case GridTier::CommonBus:
            if (g.tie) throw ValidationError("common-bus tier has no grid tie");
            break;
        case GridTier::Nodal: {
            if (g.tie || g.bess || !g.plants.empty())
                throw ValidationError("nodal tier supports machines, loads, branches and groups only");
            if (g.nodes.empty()) throw ValidationError("nodal tier needs at least one node");
            std::set<std::string> nodes(g.nodes.begin(), g.nodes.end());
            if (nodes.size() != g.nodes.size()) throw ValidationError("duplicate node id");
            for (const auto& m : g.machines)
                if (!nodes.count(m.node)) throw ValidationError("machine " + m.id + " attached to unknown node");
            for (const auto& l : g.loads)
                if (!nodes.count(l.node)) throw ValidationError("load " + l.id + " attached to unknown node");
            for (const auto& b : g.branches) {
                if (!nodes.count(b.from) || !nodes.count(b.to) || b.from == b.to)
                    throw ValidationError("branch " + b.from + "-" + b.to + ": bad endpoints");
                if (b.r == 0.0 && b.x == 0.0) throw ValidationError("branch " + b.from + "-" + b.to + ": zero impedance");
                if (!b.breaker.empty() && !g.find_breaker(b.breaker))
                    throw ValidationError("branch names unknown breaker: " + b.breaker);
            }
            break;
        }
    }

    for (const auto& grp : g.groups) {
        check(grp);
        for (const auto& port : grp.inputs) {
            auto [kind, arg] = split_port(port);
            if (kind == "const" || (kind == "freq" && arg.empty())) continue;
            if (kind == "freq" && g.machine_index(arg)) continue;
            if ((kind == "vmag" || kind == "vang") && g.tier == GridTier::Nodal && g.node_index(arg)) continue;
            throw ValidationError("group " + grp.id + ": unresolvable input port " + port);
        }
        for (const auto& port : grp.outputs) {
            auto [kind, arg] = split_port(port);
            if (kind == "trace" && !arg.empty()) continue;
            if (kind == "gscale" && g.tier == GridTier::Nodal && g.node_index(arg)) continue;
            throw ValidationError("group " + grp.id + ": unresolvable output port " + port);
        }
    }
}

double demand_total(const GridModel& g) {
    double total = g.p_loss;
    for (const auto& l : g.loads) total += l.demand();
    return total;
}

std::size_t step_at_or_after(double t, double dt) {
    const double k = std::ceil(t / dt - 1e-9);
    return k <= 0.0 ? 0 : static_cast<std::size_t>(k);
}

std::vector<GridMutation> apply_contingency(const GridModel& g, const std::vector<ContingencyEvent>& events,
                                            double dt, double horizon) {
    std::vector<GridMutation> out;
    for (const auto& e : events) {
        if (!g.machine_index(e.machine)) throw ValidationError("contingency names unknown machine: " + e.machine);
        if (!(e.time >= 0.0 && e.time <= horizon))
            throw ValidationError("contingency time outside the simulation horizon");
        out.push_back({step_at_or_after(e.time, dt), GridMutation::Kind::DisconnectMachine, e.machine, "contingency"});
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.step < b.step; });
    return out;
}

std::vector<GridMutation> breaker_schedule(const std::string& breaker, const std::vector<BreakerOp>& ops,
                                           double dt) {
    std::vector<GridMutation> out;
    for (const auto& op : ops)
        out.push_back({step_at_or_after(op.time, dt),
                       op.close ? GridMutation::Kind::CloseBreaker : GridMutation::Kind::OpenBreaker, breaker,
                       "schedule"});
    return out;
}

bool apply_mutation(GridModel& g, const GridMutation& m) {
    using K = GridMutation::Kind;
    switch (m.kind) {
        case K::DisconnectMachine: {
            auto i = g.machine_index(m.target);
            if (!i) throw ValidationError("unknown machine: " + m.target);
            if (!g.machines[*i].connected) return false;
            g.machines[*i].connected = false;
            return true;
        }
        case K::OpenBreaker:
        case K::CloseBreaker: {
            Breaker* b = g.find_breaker(m.target);
            if (!b) throw ValidationError("unknown breaker: " + m.target);
            const bool want = m.kind == K::CloseBreaker;
            if (b->closed == want) return false;
            b->closed = want;
            return true;
        }
        case K::ShedLoad:
        case K::RestoreLoad: {
            auto i = g.load_index(m.target);
            if (!i) throw ValidationError("unknown load: " + m.target);
            const bool want = m.kind == K::ShedLoad;
            if (g.loads[*i].shed == want) return false;
            g.loads[*i].shed = want;
            return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------

PhysicalSystem::PhysicalSystem(GridModel grid, bool equilibrium) : grid_(std::move(grid)) {
    check(grid_);
    pe_.assign(grid_.machines.size(), 0.0);
    initialize(equilibrium);
}

double PhysicalSystem::machine_pm(std::size_t i) const {
    const Machine& m = grid_.machines[i];
    return mechanical_power(m, m.p_gov);
}

double PhysicalSystem::plant_injection() const {
    double p = 0.0;
    for (const auto& pl : grid_.plants) p += pl.injection();
    return p;
}

double PhysicalSystem::coi_frequency() const {
    double num = 0.0, den = 0.0;
    for (const auto& m : grid_.machines) {
        if (!m.connected) continue;
        num += m.inertia_const * m.frequency_hz();
        den += m.inertia_const;
    }
    if (den == 0.0) return 0.0;
    return num / den;
}

double PhysicalSystem::bess_at(double omega) const {
    if (!grid_.bess) return 0.0;
    const double df = (omega - grid_.machines.front().omega_sync) / kTwoPi;
    return std::clamp(-grid_.bess->gain * df, -grid_.bess->p_max, grid_.bess->p_max);
}

double PhysicalSystem::tie_at(double delta) const {
    if (!grid_.tie || !grid_.breaker_closed(grid_.tie->breaker)) return 0.0;
    const Machine& m = grid_.machines.front();
    return -(m.v_internal * grid_.tie->v_grid / grid_.tie->reactance) * std::sin(delta);
}

double PhysicalSystem::net_bus_load(double omega) const {
    return demand_total(grid_) - plant_injection() - bess_at(omega);
}

void PhysicalSystem::solve(std::size_t step) {
    switch (grid_.tier) {
        case GridTier::Aggregate: {
            const Machine& m = grid_.machines.front();
            p_bess_ = bess_at(m.omega);
            p_tie_ = tie_at(m.delta);
            pe_[0] = m.connected ? demand_total(grid_) - plant_injection() - p_bess_ - p_tie_ : 0.0;
            theta_ = m.delta;
            break;
        }
        case GridTier::CommonBus: {
            double s = 0.0, c = 0.0;
            for (const auto& m : grid_.machines) {
                if (!m.connected) continue;
                const double k = m.v_internal * m.v_recv / m.reactance;
                s += k * std::sin(m.delta);
                c += k * std::cos(m.delta);
            }
            const double r = std::hypot(s, c);
            const double phi = std::atan2(s, c);
            // BESS responds to the centre-of-inertia speed.
            p_bess_ = bess_at(coi_frequency() * kTwoPi);
            const double d = demand_total(grid_) - plant_injection() - p_bess_;
            if (r <= 0.0 || std::abs(d) > r) {
                collapsed_ = true;
                theta_ = phi - std::copysign(std::numbers::pi / 2, d);
            } else {
                theta_ = phi - std::asin(d / r);
            }
            for (std::size_t i = 0; i < grid_.machines.size(); ++i) {
                const Machine& m = grid_.machines[i];
                pe_[i] = m.connected ? electrical_power(m.v_internal, m.v_recv, m.reactance, m.delta - theta_) : 0.0;
            }
            break;
        }
        case GridTier::Nodal: solve_nodal(step); break;
    }
}

void PhysicalSystem::solve_nodal(std::size_t step) {
    using cd = std::complex<double>;
    const auto n = static_cast<Eigen::Index>(grid_.nodes.size());
    ComplexBoundary nb;
    nb.Y = Eigen::MatrixXcd::Zero(n, n);
    nb.I = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) nb.Y(i, i) += grid_.leakage;
    for (const auto& m : grid_.machines) {
        if (!m.connected) continue;
        const auto k = static_cast<Eigen::Index>(*grid_.node_index(m.node));
        const cd y = 1.0 / cd(0.0, m.reactance);
        nb.Y(k, k) += y;
        nb.I(k) += std::polar(m.v_internal, m.delta) * y;
    }
    for (const auto& l : grid_.loads) {
        const double p = l.demand();
        if (p == 0.0) continue;
        const auto k = static_cast<Eigen::Index>(*grid_.node_index(l.node));
        const double q = p * std::tan(std::acos(l.power_factor));
        auto it = gscale_.find(l.node);
        const double scale = it == gscale_.end() ? 1.0 : it->second;
        nb.Y(k, k) += scale * cd(p, -q);
    }
    for (const auto& b : grid_.branches) {
        if (!grid_.breaker_closed(b.breaker)) continue;
        const auto i = static_cast<Eigen::Index>(*grid_.node_index(b.from));
        const auto j = static_cast<Eigen::Index>(*grid_.node_index(b.to));
        const cd y = 1.0 / cd(b.r, b.x);
        nb.Y(i, i) += y;
        nb.Y(j, j) += y;
        nb.Y(i, j) -= y;
        nb.Y(j, i) -= y;
    }
    try {
        v_ = nodal_solve(nb);
    } catch (const SimulationError& e) {
        throw SimulationError(e.what(), step, "nodal");
    }
    for (std::size_t i = 0; i < grid_.machines.size(); ++i) {
        const Machine& m = grid_.machines[i];
        if (!m.connected) {
            pe_[i] = 0.0;
            continue;
        }
        const cd v = v_(static_cast<Eigen::Index>(*grid_.node_index(m.node)));
        pe_[i] = electrical_power(m.v_internal, std::abs(v), m.reactance, m.delta - std::arg(v));
    }
}

Eigen::VectorXd PhysicalSystem::group_inputs(const StateSpaceGroup& g) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.inputs.size()));
    for (std::size_t k = 0; k < g.inputs.size(); ++k) {
        auto [kind, arg] = split_port(g.inputs[k]);
        double val = 1.0;
        if (kind == "freq")
            val = arg.empty() ? coi_frequency() : grid_.machines[*grid_.machine_index(arg)].frequency_hz();
        else if (kind == "vmag") val = std::abs(v_(static_cast<Eigen::Index>(*grid_.node_index(arg))));
        else if (kind == "vang") val = std::arg(v_(static_cast<Eigen::Index>(*grid_.node_index(arg))));
        v(static_cast<Eigen::Index>(k)) = val;
    }
    return v;
}

void PhysicalSystem::apply_group_outputs(const StateSpaceGroup& g, const Eigen::VectorXd& o) {
    for (std::size_t k = 0; k < g.outputs.size(); ++k) {
        auto [kind, arg] = split_port(g.outputs[k]);
        const double val = o(static_cast<Eigen::Index>(k));
        if (kind == "trace") group_traces_[arg] = val;
        else if (kind == "gscale") gscale_[arg] = val;
    }
}

void PhysicalSystem::initialize(bool equilibrium) {
    if (grid_.tier == GridTier::Nodal) v_ = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(grid_.nodes.size()));

    if (equilibrium) {
        for (auto& m : grid_.machines) {
            m.omega = m.omega_sync;
            m.p_gov = 0.0;
        }
        switch (grid_.tier) {
            case GridTier::Aggregate: {
                Machine& m = grid_.machines.front();
                const double net = demand_total(grid_) - plant_injection();
                if (grid_.tie && grid_.breaker_closed(grid_.tie->breaker)) {
                    const double k = m.v_internal * grid_.tie->v_grid / grid_.tie->reactance;
                    const double sn = (m.p_mech - net) / k;
                    if (std::abs(sn) > 1.0) throw ValidationError("grid tie cannot carry the initial mismatch");
                    m.delta = std::asin(sn);
                }
                break;
            }
            case GridTier::CommonBus:
                for (auto& m : grid_.machines) {
                    const double sn = m.p_mech * m.reactance / (m.v_internal * m.v_recv);
                    if (std::abs(sn) > 1.0) throw ValidationError("machine " + m.id + ": dispatch beyond P_max");
                    m.delta = std::asin(sn);
                }
                break;
            case GridTier::Nodal:
                for (auto& m : grid_.machines) m.delta = 0.0;
                break;
        }
    }

    // Groups start at their steady state for the initial operating point; the
    // gscale feedback is iterated to a fixed point.
    for (int iter = 0; iter < 100; ++iter) {
        solve(0);
        double change = 0.0;
        for (auto& g : grid_.groups) {
            const Eigen::VectorXd v = group_inputs(g);
            if (equilibrium && g.s.size() > 0) {
                Eigen::FullPivLU<Eigen::MatrixXd> lu(g.A);
                if (lu.isInvertible()) {
                    const Eigen::VectorXd s_ss = lu.solve(-g.D * v);
                    change = std::max(change, (s_ss - g.s).cwiseAbs().maxCoeff());
                    g.s = s_ss;
                }
            }
            apply_group_outputs(g, g.E * g.s + g.F * v);
        }
        if (!equilibrium || grid_.groups.empty() || change < 1e-13) break;
    }
    solve(0);

    if (equilibrium)
        for (std::size_t i = 0; i < grid_.machines.size(); ++i)
            if (grid_.machines[i].connected) grid_.machines[i].p_mech = pe_[i];
    collapsed_ = false;
}

void PhysicalSystem::advance(double dt, std::size_t step) {
    std::vector<Eigen::VectorXd> inputs;
    inputs.reserve(grid_.groups.size());
    for (const auto& g : grid_.groups) inputs.push_back(group_inputs(g));

    for (std::size_t i = 0; i < grid_.machines.size(); ++i) {
        Machine& m = grid_.machines[i];
        if (!m.connected) continue;
        switch (grid_.tier) {
            case GridTier::Aggregate: {
                const double base = demand_total(grid_) - plant_injection();
                m = swing_step(
                    m, [&](double delta, double omega) { return base - bess_at(omega) - tie_at(delta); }, dt, step);
                break;
            }
            case GridTier::CommonBus: {
                const double th = theta_;
                m = swing_step(
                    m,
                    [&m, th](double delta, double) {
                        return electrical_power(m.v_internal, m.v_recv, m.reactance, delta - th);
                    },
                    dt, step);
                break;
            }
            case GridTier::Nodal: {
                const auto v = v_(static_cast<Eigen::Index>(*grid_.node_index(m.node)));
                const double vm = std::abs(v), va = std::arg(v);
                m = swing_step(
                    m,
                    [&m, vm, va](double delta, double) {
                        return electrical_power(m.v_internal, vm, m.reactance, delta - va);
                    },
                    dt, step);
                break;
            }
        }
    }

    for (std::size_t k = 0; k < grid_.groups.size(); ++k) {
        StateSpaceGroup& g = grid_.groups[k];
        try {
            apply_group_outputs(g, group_step_inplace(g, inputs[k], dt));
        } catch (const SimulationError& e) {
            throw SimulationError(e.what(), step, g.id);
        }
        if (!g.s.allFinite()) throw SimulationError("group state diverged", step, g.id);
    }
}

}  // namespace cpes::phys
