#include "cpes/physical/swing.hpp"

#include <algorithm>
#include <cmath>

#include "cpes/error.hpp"

namespace cpes::phys {

void check(const Machine& m) {
    if (!(m.inertia_const > 0.0)) throw ValidationError("machine " + m.id + ": inertia constant must be > 0");
    if (!(m.reactance > 0.0)) throw ValidationError("machine " + m.id + ": reactance must be > 0");
    if (!(m.omega_sync > 0.0)) throw ValidationError("machine " + m.id + ": synchronous speed must be > 0");
    if (m.governor && m.governor->time_constant < 0.0)
        throw ValidationError("machine " + m.id + ": governor time constant must be >= 0");
}

double electrical_power(double v_s, double v_r, double x_reactance, double delta) {
    if (!(x_reactance > 0.0)) throw ValidationError("reactance must be > 0");
    return v_s * v_r / x_reactance * std::sin(delta);
}

double governor_target(const Machine& m, double omega) {
    if (!m.governor) return 0.0;
    const Governor& g = *m.governor;
    const double dev = (omega - m.omega_sync) / (2.0 * std::numbers::pi);
    const double beyond = std::max(std::abs(dev) - g.deadband, 0.0);
    const double target = -g.gain * std::copysign(beyond, dev);
    return std::clamp(target, g.p_min - m.p_mech, g.p_max - m.p_mech);
}

double mechanical_power(const Machine& m, double p_gov) {
    const double pm = m.p_mech + p_gov;
    if (!m.governor) return pm;
    return std::clamp(pm, m.governor->p_min, m.governor->p_max);
}

namespace {

struct State {
    double delta;
    double dw;  // omega - omega_sync
    double p_gov;
};

struct Deriv {
    double d_delta;
    double d_dw;
    double d_gov;
};

}  // namespace

Machine swing_step(const Machine& m, const PowerFn& p_elec, double dt, std::size_t step) {
    if (!(dt > 0.0) || dt > kMaxSwingDt + 1e-15)
        throw ValidationError("swing step dt must lie in (0, 10 ms]");

    const bool lagged = m.governor && m.governor->time_constant > 0.0;
    const double ws = m.omega_sync;
    const double k = ws / (2.0 * m.inertia_const);

    // Integrate the speed deviation rather than omega to keep precision near ws.
    auto f = [&](const State& s) -> Deriv {
        const double omega = ws + s.dw;
        double p_gov = s.p_gov;
        double d_gov = 0.0;
        if (m.governor) {
            const double target = governor_target(m, omega);
            if (lagged) d_gov = (target - s.p_gov) / m.governor->time_constant;
            else p_gov = target;
        }
        const double pm = mechanical_power(m, p_gov);
        const double pe = p_elec(s.delta, omega);
        const double damp = m.damping * s.dw / ws;
        return {s.dw, k * (pm - pe - damp), d_gov};
    };

    const State s0{m.delta, m.omega - ws, m.p_gov};
    auto add = [](const State& s, const Deriv& d, double h) {
        return State{s.delta + h * d.d_delta, s.dw + h * d.d_dw, s.p_gov + h * d.d_gov};
    };
    const Deriv k1 = f(s0);
    const Deriv k2 = f(add(s0, k1, dt / 2));
    const Deriv k3 = f(add(s0, k2, dt / 2));
    const Deriv k4 = f(add(s0, k3, dt));

    Machine out = m;
    out.delta = s0.delta + dt / 6.0 * (k1.d_delta + 2 * k2.d_delta + 2 * k3.d_delta + k4.d_delta);
    const double dw = s0.dw + dt / 6.0 * (k1.d_dw + 2 * k2.d_dw + 2 * k3.d_dw + k4.d_dw);
    out.omega = ws + dw;
    if (lagged) {
        out.p_gov = s0.p_gov + dt / 6.0 * (k1.d_gov + 2 * k2.d_gov + 2 * k3.d_gov + k4.d_gov);
    } else if (m.governor) {
        out.p_gov = governor_target(m, out.omega);
    }
    if (!std::isfinite(out.delta) || !std::isfinite(out.omega) || !std::isfinite(out.p_gov))
        throw SimulationError("integration diverged", step, m.id);
    return out;
}

Machine swing_step(const Machine& m, double p_elec, double dt, std::size_t step) {
    return swing_step(m, [p_elec](double, double) { return p_elec; }, dt, step);
}

}  // namespace cpes::phys
