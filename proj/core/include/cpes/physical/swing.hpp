#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace cpes::phys {

/// Proportional droop with a continuous deadband and an optional first-order
/// valve lag. gain is per-unit power per Hz of deviation beyond the deadband.
struct Governor {
    double gain = 0.0;
    double deadband = 0.036;
    double time_constant = 0.0;  // 0: droop acts instantaneously
    double p_min = 0.0;
    double p_max = std::numeric_limits<double>::infinity();
};

/// Classical synchronous machine. omega is absolute electrical speed (rad/s);
/// delta is the rotor angle against the synchronously rotating reference.
struct Machine {
    std::string id;
    double inertia_const = 5.0;  // H, seconds
    double p_mech = 0.0;         // scheduled mechanical power, pu
    double delta = 0.0;          // rad
    double omega = 2.0 * std::numbers::pi * 60.0;
    double omega_sync = 2.0 * std::numbers::pi * 60.0;
    double v_internal = 1.0;  // Vs, pu
    double reactance = 0.3;   // X, pu
    double v_recv = 1.0;      // Vr of the bus the machine feeds, pu
    double damping = 0.0;     // pu power per pu speed deviation; not part of the classical model
    std::optional<Governor> governor;
    double p_gov = 0.0;  // governor output offset added to p_mech
    bool connected = true;
    std::string node;  // attachment node for the nodal tier

    double frequency_hz() const { return omega / (2.0 * std::numbers::pi); }
    double nominal_hz() const { return omega_sync / (2.0 * std::numbers::pi); }
};

/// Throws cpes::ValidationError unless H > 0, X > 0, omega_sync > 0.
void check(const Machine& m);

/// (Vs Vr / X) sin(delta). Throws cpes::ValidationError for X <= 0.
double electrical_power(double v_s, double v_r, double x_reactance, double delta);

/// Electrical output as a function of the machine's own (delta, omega),
/// with everything else frozen over the step.
using PowerFn = std::function<double(double delta, double omega)>;

/// Governor offset target for a given speed (continuous deadband, limits applied).
double governor_target(const Machine& m, double omega);
/// p_mech + p_gov clamped to the governor limits (if any).
double mechanical_power(const Machine& m, double p_gov);

inline constexpr double kMaxSwingDt = 0.010;

/// Advance (delta, omega[, p_gov]) by one classical RK4 step.
/// Throws cpes::SimulationError carrying `step` if the result is not finite,
/// cpes::ValidationError for dt outside (0, 10 ms].
Machine swing_step(const Machine& m, const PowerFn& p_elec, double dt, std::size_t step = 0);
Machine swing_step(const Machine& m, double p_elec, double dt, std::size_t step = 0);

}  // namespace cpes::phys
