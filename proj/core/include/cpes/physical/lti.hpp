#pragma once

#include <string>

#include <Eigen/Dense>

#include "cpes/rng.hpp"

namespace cpes::phys {

/// Discrete-time plant x(k+1) = G x(k) + B u(k), y(k) = C x(k) + e(k), with
/// output feedback u(k+1) = control_matrix * y(k).
struct LtiPlant {
    std::string id;
    Eigen::MatrixXd G;               // n x n
    Eigen::MatrixXd B;               // n x l
    Eigen::MatrixXd C;               // m x n
    Eigen::MatrixXd control_matrix;  // l x m
    Eigen::VectorXd noise_std;       // m, per-channel sigma of e
    Eigen::VectorXd x;               // n
    Eigen::VectorXd u;               // l

    Eigen::Index n() const { return G.rows(); }
    Eigen::Index m() const { return C.rows(); }
    Eigen::Index l() const { return B.cols(); }
};

/// Throws cpes::ValidationError on inconsistent dimensions or negative noise.
void check(const LtiPlant& plant);

struct LtiStep {
    Eigen::VectorXd x_next;
    Eigen::VectorXd y;
};

/// One step with the plant's stored control u. Noise is drawn only for
/// channels with non-zero sigma, so a noise-free plant never touches `rng`.
LtiStep lti_step(const LtiPlant& plant, Rng& rng);
/// Same step with an explicit control vector (used when a control tap is attacked).
LtiStep lti_step(const LtiPlant& plant, const Eigen::VectorXd& u, Rng& rng);

/// control_matrix * y: the control applied at the next step boundary.
Eigen::VectorXd next_control(const LtiPlant& plant, const Eigen::VectorXd& y);

}  // namespace cpes::phys
