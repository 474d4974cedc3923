#include "cpes/cosim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "cpes/attack.hpp"
#include "cpes/cosim/export.hpp"
#include "cpes/cyber/event_queue.hpp"
#include "cpes/cyber/network.hpp"
#include "cpes/error.hpp"
#include "cpes/physical/grid.hpp"
#include "cpes/rng.hpp"
#include "cpes/version.hpp"

namespace cpes::cosim {

using cyber::kv;

namespace {

class Recorder {
public:
    std::size_t add(std::string name, std::string unit) {
        series_.push_back({std::move(name), std::move(unit), {}, {}});
        return series_.size() - 1;
    }
    void set(std::size_t i, double v) { series_[i].v.push_back(v); }
    void tick(double t) { t_.push_back(t); }

    std::map<std::string, metrics::TimeSeries> finish() {
        std::map<std::string, metrics::TimeSeries> out;
        for (auto& s : series_) {
            s.t = t_;
            auto name = s.name;
            out.emplace(std::move(name), std::move(s));
        }
        return out;
    }

private:
    std::vector<double> t_;
    std::vector<metrics::TimeSeries> series_;
};

struct SignalDelay {
    const attack::TimeDelay* spec;
    Eigen::Index channel;
};

struct PlantRun {
    std::size_t index = 0;
    Rng rng;
    std::vector<std::vector<double>> history;  // true outputs per channel
    std::vector<const attack::DiaCombined*> dia;
    std::vector<const attack::ControlDia*> control;
    std::vector<SignalDelay> delays;
    Eigen::VectorXd x_next;
    Eigen::VectorXd y_a;
    std::vector<std::size_t> tr_y, tr_y_true, tr_x, tr_u, tr_dia, tr_control;
};

std::string asset_id(const std::string& asset) {
    const auto pos = asset.find(':');
    return pos == std::string::npos ? std::string{} : asset.substr(pos + 1);
}

phys::GridMutation::Kind command_kind(const std::string& action) {
    if (action == "open_breaker") return phys::GridMutation::Kind::OpenBreaker;
    if (action == "close_breaker") return phys::GridMutation::Kind::CloseBreaker;
    if (action == "shed_load") return phys::GridMutation::Kind::ShedLoad;
    return phys::GridMutation::Kind::RestoreLoad;
}

const char* mutation_event(phys::GridMutation::Kind k) {
    switch (k) {
        case phys::GridMutation::Kind::DisconnectMachine: return "machine_disconnect";
        case phys::GridMutation::Kind::OpenBreaker: return "breaker_open";
        case phys::GridMutation::Kind::CloseBreaker: return "breaker_close";
        case phys::GridMutation::Kind::ShedLoad: return "load_shed";
        case phys::GridMutation::Kind::RestoreLoad: return "load_restore";
    }
    return "mutation";
}

}  // namespace

std::vector<metrics::MetricRequest> effective_metrics(const Scenario& sc) {
    if (!sc.metrics.empty()) return sc.metrics;
    std::vector<metrics::MetricRequest> out{{"frequency", "f_coi", {}}};
    if (sc.network) out.push_back({"cyber", "", {}});
    return out;
}

RunResult run(const Scenario& sc) {
    validate(sc);
    RunResult result;
    result.scenario_json = emit_scenario(sc);
    result.manifest = {sc.seed, std::string(kVersion), sha256_hex(result.scenario_json)};

    const double dt = sc.dt;
    const std::size_t n_steps = sc.steps();
    phys::PhysicalSystem sys(sc.grid, sc.equilibrium);
    phys::GridModel& grid = sys.grid();

    // Scheduled mutations: contingencies, breaker schedules, breaker attacks.
    std::vector<phys::GridMutation> scheduled = phys::apply_contingency(grid, grid.contingencies, dt, sc.horizon);
    for (const auto& b : grid.breakers)
        for (auto& m : phys::breaker_schedule(b.id, b.schedule, dt)) scheduled.push_back(std::move(m));
    for (const auto& spec : sc.attacks)
        if (const auto* a = std::get_if<attack::BreakerAttack>(&spec))
            for (auto& m : attack::apply_breaker_attack(grid, *a, dt)) scheduled.push_back(std::move(m));
    std::stable_sort(scheduled.begin(), scheduled.end(),
                     [](const auto& a, const auto& b) { return a.step < b.step; });
    std::size_t next_scheduled = 0;
    std::vector<phys::GridMutation> commanded;  // nondecreasing steps
    std::size_t next_commanded = 0;

    cyber::EventLog& log = result.events;
    cyber::EventQueue queue;

    // Plants and their attack taps.
    std::vector<PlantRun> plants;
    std::map<std::string, Rng> attack_rng;
    Recorder rec;
    for (std::size_t i = 0; i < grid.plants.size(); ++i) {
        const auto& p = grid.plants[i].plant;
        PlantRun pr;
        pr.index = i;
        pr.rng = stream(sc.seed, "plant:" + p.id);
        pr.history.resize(static_cast<std::size_t>(p.m()));
        for (const auto& spec : sc.attacks) {
            if (const auto* a = std::get_if<attack::DiaCombined>(&spec); a && a->plant == p.id) {
                pr.dia.push_back(a);
                attack_rng.emplace(a->id, stream(sc.seed, "attack:" + a->id));
            } else if (const auto* c = std::get_if<attack::ControlDia>(&spec); c && c->plant == p.id) {
                pr.control.push_back(c);
            } else if (const auto* d = std::get_if<attack::TimeDelay>(&spec); d && !d->on_link()) {
                const std::string rest = d->signal.substr(d->signal.find(':') + 1);
                const auto colon = rest.find(':');
                if (rest.substr(0, colon) == p.id) pr.delays.push_back({d, std::stol(rest.substr(colon + 1))});
            }
        }
        for (Eigen::Index c = 0; c < p.m(); ++c) {
            pr.tr_y.push_back(rec.add(p.id + "_y" + std::to_string(c), ""));
            pr.tr_y_true.push_back(rec.add(p.id + "_y" + std::to_string(c) + "_true", ""));
        }
        for (Eigen::Index c = 0; c < p.n(); ++c) pr.tr_x.push_back(rec.add(p.id + "_x" + std::to_string(c), ""));
        for (Eigen::Index c = 0; c < p.l(); ++c) pr.tr_u.push_back(rec.add(p.id + "_u" + std::to_string(c), ""));
        for (const auto* a : pr.dia) pr.tr_dia.push_back(rec.add(a->id + "_dy", ""));
        for (const auto* a : pr.control) pr.tr_control.push_back(rec.add(a->id + "_du", ""));
        pr.y_a = Eigen::VectorXd::Zero(p.m());
        plants.push_back(std::move(pr));
    }

    std::vector<const attack::LoadChange*> load_changes;
    for (const auto& spec : sc.attacks)
        if (const auto* a = std::get_if<attack::LoadChange>(&spec)) load_changes.push_back(a);

    // Grid traces.
    const std::size_t tr_f = rec.add("f_coi", "Hz");
    std::vector<std::size_t> tr_fm, tr_pe, tr_pm;
    for (const auto& m : grid.machines) {
        tr_fm.push_back(rec.add("f_" + m.id, "Hz"));
        tr_pe.push_back(rec.add("pe_" + m.id, "pu"));
        tr_pm.push_back(rec.add("pm_" + m.id, "pu"));
    }
    const std::size_t tr_demand = rec.add("demand", "pu");
    std::size_t tr_bess = 0, tr_tie = 0, tr_pv = 0;
    const bool aggregate = grid.tier == phys::GridTier::Aggregate;
    if (aggregate) {
        tr_bess = rec.add("p_bess", "pu");
        tr_tie = rec.add("p_tie", "pu");
        tr_pv = rec.add("p_pv", "pu");
    }
    std::vector<std::size_t> tr_v;
    if (grid.tier == phys::GridTier::Nodal)
        for (const auto& n : grid.nodes) tr_v.push_back(rec.add("v_" + n, "pu"));
    std::vector<std::pair<std::string, std::size_t>> tr_groups;
    for (const auto& g : grid.groups)
        for (const auto& o : g.outputs)
            if (o.rfind("trace:", 0) == 0) {
                const std::string name = o.substr(6);
                tr_groups.emplace_back(name, rec.add(name, "pu"));
            }

    // Network.
    std::optional<cyber::Network> net;
    std::size_t current_step = 0;
    if (sc.network) {
        net.emplace(*sc.network, queue, log, sc.seed);
        for (const auto& spec : sc.attacks) {
            if (const auto* d = std::get_if<attack::DoS>(&spec)) net->add_impairment(attack::apply_dos(*d));
            else if (const auto* t = std::get_if<attack::TimeDelay>(&spec); t && t->on_link())
                net->add_impairment(attack::link_delay(*t));
        }
        net->measure = [&](const std::string& asset) -> std::vector<double> {
            const auto pos = asset.find(':');
            const std::string kind = asset.substr(0, pos);
            const std::string id = asset_id(asset);
            if (kind == "load") {
                const auto& l = grid.loads[*grid.load_index(id)];
                return {l.demand(), l.shed ? 1.0 : 0.0};
            }
            if (kind == "breaker") return {grid.breaker_closed(id) ? 1.0 : 0.0};
            if (kind == "machine") {
                const auto i = *grid.machine_index(id);
                return {grid.machines[i].frequency_hz(), sys.machine_pe(i)};
            }
            if (kind == "plant") {
                for (const auto& pr : plants)
                    if (grid.plants[pr.index].plant.id == id)
                        return {pr.y_a.data(), pr.y_a.data() + pr.y_a.size()};
            }
            return {sys.coi_frequency()};
        };
        net->on_command = [&](const cyber::Command& cmd, double t, std::uint64_t packet_id, const std::string& node) {
            std::string target = cmd.target;
            if (target.empty()) target = asset_id(sc.network->nodes[*sc.network->node_index(node)].outstation->asset);
            const std::size_t step = std::max(phys::step_at_or_after(t, dt), current_step + 1);
            commanded.push_back({step, command_kind(cmd.action), target, "command"});
            log.add({t, "command_received", node, packet_id,
                     {kv("action", cmd.action), kv("target", target), kv("effective_step", std::uint64_t{step})}});
        };
        net->start(sc.horizon);
    }

    auto apply = [&](const phys::GridMutation& m, double t) {
        const bool changed = phys::apply_mutation(grid, m);
        log.add({t, mutation_event(m.kind), m.target, std::nullopt,
                 {kv("source", m.source), kv("changed", changed ? "true" : "false")}});
    };

    phys::ProtectionAction last_class = phys::ProtectionAction::None;
    bool collapse_logged = false;

    for (std::size_t k = 0; k <= n_steps; ++k) {
        current_step = k;
        const double t = static_cast<double>(k) * dt;

        while (next_scheduled < scheduled.size() && scheduled[next_scheduled].step <= k)
            apply(scheduled[next_scheduled++], t);
        while (next_commanded < commanded.size() && commanded[next_commanded].step <= k)
            apply(commanded[next_commanded++], t);

        for (auto& l : grid.loads) {
            double delta = 0.0;
            for (const auto* a : load_changes) delta += attack::load_delta(l, t, *a);
            if (delta != l.delta_demand) {
                l.delta_demand = delta;
                log.add({t, "load_change", l.id, std::nullopt, {kv("delta", delta)}});
            }
        }

        // Plants: sample at t with taps applied.
        for (auto& pr : plants) {
            auto& binding = grid.plants[pr.index];
            const auto& p = binding.plant;
            Eigen::VectorXd u = p.u;
            for (std::size_t j = 0; j < pr.control.size(); ++j) {
                const auto* a = pr.control[j];
                const double before = u(a->channel);
                u(a->channel) = attack::apply_control_dia(before, t, *a);
                rec.set(pr.tr_control[j], u(a->channel) - before);
            }
            phys::LtiStep st;
            try {
                st = phys::lti_step(p, u, pr.rng);
            } catch (const SimulationError& e) {
                throw SimulationError(e.what(), k, p.id);
            }
            pr.x_next = std::move(st.x_next);
            for (Eigen::Index c = 0; c < p.m(); ++c) pr.history[static_cast<std::size_t>(c)].push_back(st.y(c));
            pr.y_a = st.y;
            for (const auto& d : pr.delays) {
                const auto steps = static_cast<std::size_t>(attack::schedule_value(d.spec->delay, t));
                try {
                    pr.y_a(d.channel) = attack::apply_delay(pr.history[static_cast<std::size_t>(d.channel)], k, steps,
                                                            d.spec->window, dt, d.spec->pre_history);
                } catch (const SimulationError& e) {
                    throw SimulationError(e.what(), k, d.spec->id);
                }
            }
            for (std::size_t j = 0; j < pr.dia.size(); ++j) {
                const auto* a = pr.dia[j];
                const double before = pr.y_a(a->channel);
                pr.y_a(a->channel) = attack::apply_dia(before, t, *a, attack_rng.at(a->id));
                rec.set(pr.tr_dia[j], pr.y_a(a->channel) - before);
            }
            for (Eigen::Index c = 0; c < p.m(); ++c) {
                rec.set(pr.tr_y[static_cast<std::size_t>(c)], pr.y_a(c));
                rec.set(pr.tr_y_true[static_cast<std::size_t>(c)], st.y(c));
            }
            for (Eigen::Index c = 0; c < p.n(); ++c) rec.set(pr.tr_x[static_cast<std::size_t>(c)], p.x(c));
            for (Eigen::Index c = 0; c < p.l(); ++c) rec.set(pr.tr_u[static_cast<std::size_t>(c)], u(c));

            const double inj = binding.injection();
            if (!binding.tripped && ((binding.trip_low && inj < *binding.trip_low) ||
                                     (binding.trip_high && inj > *binding.trip_high))) {
                binding.tripped = true;
                log.add({t, "plant_trip", p.id, std::nullopt, {kv("injection", inj)}});
            }
        }

        sys.solve(k);

        rec.tick(t);
        const double f = sys.coi_frequency();
        rec.set(tr_f, f);
        for (std::size_t i = 0; i < grid.machines.size(); ++i) {
            const auto& m = grid.machines[i];
            rec.set(tr_fm[i], m.connected ? m.frequency_hz() : 0.0);
            rec.set(tr_pe[i], sys.machine_pe(i));
            rec.set(tr_pm[i], m.connected ? sys.machine_pm(i) : 0.0);
        }
        rec.set(tr_demand, phys::demand_total(grid));
        if (aggregate) {
            rec.set(tr_bess, sys.bess_power());
            rec.set(tr_tie, sys.tie_power());
            rec.set(tr_pv, sys.plant_injection());
        }
        for (std::size_t i = 0; i < tr_v.size(); ++i)
            rec.set(tr_v[i], std::abs(sys.voltages()(static_cast<Eigen::Index>(i))));
        for (const auto& [name, idx] : tr_groups) {
            const auto it = sys.group_traces().find(name);
            rec.set(idx, it == sys.group_traces().end() ? 0.0 : it->second);
        }

        const auto cls = phys::protection_check(f, grid.protection, grid.f_nom);
        if (cls != last_class) {
            log.add({t, "protection", "grid", std::nullopt,
                     {kv("action", std::string(phys::to_string(cls))), kv("f", f)}});
            last_class = cls;
        }
        if (sys.collapsed() && !collapse_logged) {
            log.add({t, "collapse", "grid", std::nullopt, {}});
            collapse_logged = true;
        }

        if (k == n_steps) break;

        queue.run_until(static_cast<double>(k + 1) * dt);

        for (auto& pr : plants) {
            auto& p = grid.plants[pr.index].plant;
            p.x = pr.x_next;
            p.u = phys::next_control(p, pr.y_a);
        }
        sys.advance(dt, k);
    }

    result.traces = rec.finish();
    result.metrics = metrics::evaluate(effective_metrics(sc), result.traces, log, sc.horizon, grid.protection,
                                       grid.f_nom);
    if (sc.risk)
        result.risk = risk::assess(sc.risk->probability, sc.risk->priorities, sc.risk->impacts, sc.risk->thresholds);
    if (sc.threat) result.threat = threat::validate(*sc.threat);
    return result;
}

std::vector<BatchOutcome> run_batch(const std::vector<Scenario>& scenarios, unsigned jobs) {
    std::vector<BatchOutcome> out(scenarios.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            try {
                out[i].result = run(scenarios[i]);
            } catch (const SimulationError& e) {
                out[i] = {std::nullopt, 3, e.what()};
            } catch (const Error& e) {
                out[i] = {std::nullopt, 2, e.what()};
            } catch (const std::exception& e) {
                out[i] = {std::nullopt, 3, e.what()};
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(scenarios.size())));
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    return out;
}

}  // namespace cpes::cosim
