#include "cpes/physical/lti.hpp"

#include "cpes/error.hpp"

namespace cpes::phys {

void check(const LtiPlant& p) {
    const auto n = p.G.rows();
    const std::string who = "plant " + p.id + ": ";
    if (n == 0 || p.G.cols() != n) throw ValidationError(who + "G must be a non-empty square matrix");
    if (p.B.rows() != n) throw ValidationError(who + "B must have n rows");
    if (p.C.cols() != n) throw ValidationError(who + "C must have n columns");
    const auto m = p.C.rows();
    const auto l = p.B.cols();
    if (p.control_matrix.rows() != l || p.control_matrix.cols() != m)
        throw ValidationError(who + "control matrix must be l x m");
    if (p.noise_std.size() != m) throw ValidationError(who + "noise_std must have m entries");
    if ((p.noise_std.array() < 0.0).any()) throw ValidationError(who + "noise_std must be non-negative");
    if (p.x.size() != n) throw ValidationError(who + "x must have n entries");
    if (p.u.size() != l) throw ValidationError(who + "u must have l entries");
}

LtiStep lti_step(const LtiPlant& plant, Rng& rng) { return lti_step(plant, plant.u, rng); }

LtiStep lti_step(const LtiPlant& plant, const Eigen::VectorXd& u, Rng& rng) {
    LtiStep out;
    out.x_next = plant.G * plant.x + plant.B * u;
    out.y = plant.C * plant.x;
    for (Eigen::Index i = 0; i < out.y.size(); ++i) {
        const double sigma = plant.noise_std[i];
        if (sigma > 0.0) out.y[i] += std::normal_distribution<double>(0.0, sigma)(rng);
    }
    return out;
}

Eigen::VectorXd next_control(const LtiPlant& plant, const Eigen::VectorXd& y) { return plant.control_matrix * y; }

}  // namespace cpes::phys
