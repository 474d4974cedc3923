#include "cpes/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cpes/error.hpp"

namespace cpes::attack {

bool AttackWindow::contains(double t) const {
    for (const auto& iv : intervals)
        if (t >= iv.start - kWindowGuard && t < iv.end - kWindowGuard) return true;
    return false;
}

void check(const AttackWindow& w) {
    for (std::size_t i = 0; i < w.intervals.size(); ++i) {
        const auto& iv = w.intervals[i];
        if (!std::isfinite(iv.start) || !std::isfinite(iv.end) || !(iv.start < iv.end))
            throw ValidationError("attack window interval must satisfy start < end");
        if (i > 0 && !(w.intervals[i - 1].end <= iv.start))
            throw ValidationError("attack window intervals must be sorted and disjoint");
    }
}

double schedule_value(const Schedule& s, double t) {
    double v = 0.0;
    for (const auto& st : s) {
        if (st.time > t + kWindowGuard) break;
        v = st.value;
    }
    return v;
}

namespace {

void check_schedule(const Schedule& s, const std::string& id) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s[i].time) || !std::isfinite(s[i].value))
            throw ValidationError("attack " + id + ": schedule entries must be finite");
        if (i > 0 && !(s[i - 1].time < s[i].time))
            throw ValidationError("attack " + id + ": schedule must be strictly time-sorted");
    }
}

}  // namespace

const std::string& id_of(const AttackSpec& a) {
    return std::visit([](const auto& s) -> const std::string& { return s.id; }, a);
}

std::string_view kind_of(const AttackSpec& a) {
    static constexpr std::string_view names[] = {"dia_combined", "control_dia", "load_change",
                                                 "time_delay",   "dos",         "breaker_attack"};
    return names[a.index()];
}

void check(const AttackSpec& a) {
    const std::string& id = id_of(a);
    if (id.empty()) throw ValidationError("attack with empty id");
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DiaCombined>) {
                check(s.window);
                if (!std::isfinite(s.beta)) throw ValidationError("attack " + id + ": beta must be finite");
                if (const auto* g = std::get_if<GaussianNoise>(&s.noise); g && !(g->sigma >= 0.0))
                    throw ValidationError("attack " + id + ": sigma must be >= 0");
                if (const auto* w = std::get_if<SinusoidNoise>(&s.noise);
                    w && !(std::isfinite(w->amplitude) && std::isfinite(w->freq_hz)))
                    throw ValidationError("attack " + id + ": sinusoid parameters must be finite");
            } else if constexpr (std::is_same_v<T, ControlDia>) {
                check(s.window);
                check_schedule(s.delta_u, id);
            } else if constexpr (std::is_same_v<T, LoadChange>) {
                check(s.window);
                if (s.targets.empty()) throw ValidationError("attack " + id + ": no target loads");
                if (!std::isfinite(s.delta)) throw ValidationError("attack " + id + ": delta must be finite");
                if (s.fraction && !(s.delta > -1.0))
                    throw ValidationError("attack " + id + ": fractional delta must be > -1");
            } else if constexpr (std::is_same_v<T, TimeDelay>) {
                check(s.window);
                check_schedule(s.delay, id);
                if (s.link.empty() == s.signal.empty())
                    throw ValidationError("attack " + id + ": time delay needs exactly one of link or signal");
                for (const auto& st : s.delay) {
                    if (!(st.value >= 0.0)) throw ValidationError("attack " + id + ": delay must be >= 0");
                    if (!s.on_link() && st.value != std::floor(st.value))
                        throw ValidationError("attack " + id + ": signal delay must be an integer step count");
                }
            } else if constexpr (std::is_same_v<T, DoS>) {
                check(s.window);
                if (s.link.empty()) throw ValidationError("attack " + id + ": DoS needs a link");
            } else {
                double last = -1.0;
                for (const auto& op : s.schedule) {
                    if (!(op.time >= 0.0) || !(op.time > last))
                        throw ValidationError("attack " + id + ": breaker schedule must be strictly time-sorted");
                    last = op.time;
                }
            }
        },
        a);
}

double apply_dia(double y, double t, const DiaCombined& spec, Rng& rng) {
    if (!spec.window.contains(t)) return y;
    double w = 0.0;
    if (const auto* g = std::get_if<GaussianNoise>(&spec.noise)) {
        if (g->sigma > 0.0) w = std::normal_distribution<double>(0.0, g->sigma)(rng);
    } else if (const auto* s = std::get_if<SinusoidNoise>(&spec.noise)) {
        w = s->amplitude * std::sin(2.0 * std::numbers::pi * s->freq_hz * t);
    }
    return spec.beta * y + w;
}

double apply_control_dia(double u, double t, const ControlDia& spec) {
    if (!spec.window.contains(t)) return u;
    return u + schedule_value(spec.delta_u, t);
}

double load_delta(const phys::Load& load, double t, const LoadChange& spec) {
    if (!spec.window.contains(t)) return 0.0;
    if (std::find(spec.targets.begin(), spec.targets.end(), load.id) == spec.targets.end()) return 0.0;
    return spec.fraction ? load.base_demand * spec.delta : spec.delta;
}

void apply_load_change(phys::GridModel& grid, double t, const LoadChange& spec) {
    for (const auto& id : spec.targets) {
        auto i = grid.load_index(id);
        if (!i) throw ValidationError("attack " + spec.id + ": unknown load " + id);
        grid.loads[*i].delta_demand = load_delta(grid.loads[*i], t, spec);
    }
}

double apply_delay(std::span<const double> history, std::size_t k, std::size_t d_steps, const AttackWindow& window,
                   double dt, PreHistory mode) {
    if (k >= history.size()) throw ValidationError("apply_delay: step beyond recorded history");
    if (d_steps == 0 || !window.contains(static_cast<double>(k) * dt)) return history[k];
    if (d_steps > k) {
        if (mode == PreHistory::Error) throw SimulationError("delay reaches before the recorded history", k);
        return history[0];
    }
    return history[k - d_steps];
}

cyber::LinkImpairment apply_dos(const DoS& spec) {
    cyber::LinkImpairment imp;
    imp.link = spec.link;
    imp.attack_id = spec.id;
    imp.kind = cyber::LinkImpairment::Kind::Drop;
    imp.active = [w = spec.window](double t) { return w.contains(t); };
    imp.delay = [](double) { return 0.0; };
    return imp;
}

cyber::LinkImpairment link_delay(const TimeDelay& spec) {
    if (!spec.on_link()) throw ValidationError("attack " + spec.id + ": not a link tap");
    cyber::LinkImpairment imp;
    imp.link = spec.link;
    imp.attack_id = spec.id;
    imp.kind = cyber::LinkImpairment::Kind::Delay;
    imp.active = [w = spec.window](double t) { return w.contains(t); };
    imp.delay = [d = spec.delay](double t) { return schedule_value(d, t); };
    return imp;
}

std::vector<phys::GridMutation> apply_breaker_attack(const phys::GridModel& grid, const BreakerAttack& spec,
                                                     double dt) {
    if (!grid.find_breaker(spec.breaker))
        throw ValidationError("attack " + spec.id + ": unknown breaker " + spec.breaker);
    check(AttackSpec{spec});
    auto out = phys::breaker_schedule(spec.breaker, spec.schedule, dt);
    for (auto& m : out) m.source = "attack";
    return out;
}

}  // namespace cpes::attack
