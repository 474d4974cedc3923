#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cpes::phys {

/// Continuous-time group s' = A s + D v, o = E s + F v, advanced with the
/// trapezoidal (bilinear) rule and a zero-order-held input.
///
/// Port names bind the group to the rest of the grid:
///   inputs:  "vmag:<node>", "vang:<node>", "freq:<machine>", "const"
///   outputs: "trace:<name>" (recorded), "gscale:<node>" (load conductance
///            multiplier at a nodal bus for the next solve)
struct StateSpaceGroup {
    std::string id;
    Eigen::MatrixXd A;  // q x q
    Eigen::MatrixXd D;  // q x p
    Eigen::MatrixXd E;  // r x q
    Eigen::MatrixXd F;  // r x p
    Eigen::VectorXd s;  // q
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    // Discretization cache, valid for cached_dt only.
    double cached_dt = 0.0;
    Eigen::MatrixXd step_state;  // (I - h/2 A)^-1 (I + h/2 A)
    Eigen::MatrixXd step_input;  // (I - h/2 A)^-1 h D
};

/// Throws cpes::ValidationError on inconsistent dimensions or port counts.
void check(const StateSpaceGroup& g);

struct GroupStep {
    StateSpaceGroup group;
    Eigen::VectorXd output;
};

/// Throws cpes::SimulationError when (I - dt/2 A) is singular.
GroupStep group_step(const StateSpaceGroup& g, const Eigen::VectorXd& v_in, double dt);
/// In-place variant used by the engine; returns the output.
Eigen::VectorXd group_step_inplace(StateSpaceGroup& g, const Eigen::VectorXd& v_in, double dt);

}  // namespace cpes::phys
