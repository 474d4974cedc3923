#include "cpes/physical/state_space.hpp"

#include <cmath>

#include "cpes/error.hpp"

namespace cpes::phys {

void check(const StateSpaceGroup& g) {
    const auto q = g.A.rows();
    const std::string who = "group " + g.id + ": ";
    if (g.A.cols() != q) throw ValidationError(who + "A must be square");
    const auto p = g.D.cols();
    if (g.D.rows() != q) throw ValidationError(who + "D must have q rows");
    if (g.E.cols() != q) throw ValidationError(who + "E must have q columns");
    const auto r = g.E.rows();
    if (g.F.rows() != r || g.F.cols() != p) throw ValidationError(who + "F must be r x p");
    if (g.s.size() != q) throw ValidationError(who + "state vector must have q entries");
    if (!g.inputs.empty() && static_cast<Eigen::Index>(g.inputs.size()) != p)
        throw ValidationError(who + "input port count must equal the columns of D");
    if (!g.outputs.empty() && static_cast<Eigen::Index>(g.outputs.size()) != r)
        throw ValidationError(who + "output port count must equal the rows of E");
}

namespace {

void discretize(StateSpaceGroup& g, double dt) {
    if (g.cached_dt == dt && g.step_state.rows() == g.A.rows()) return;
    const auto q = g.A.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(q, q);
    const Eigen::MatrixXd lhs = I - 0.5 * dt * g.A;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
    if (q > 0 && !lu.isInvertible()) throw SimulationError("trapezoidal system (I - dt/2 A) is singular", 0, g.id);
    g.step_state = q > 0 ? Eigen::MatrixXd(lu.solve(I + 0.5 * dt * g.A)) : Eigen::MatrixXd(0, 0);
    g.step_input = q > 0 ? Eigen::MatrixXd(lu.solve(dt * g.D)) : Eigen::MatrixXd(0, g.D.cols());
    g.cached_dt = dt;
}

}  // namespace

Eigen::VectorXd group_step_inplace(StateSpaceGroup& g, const Eigen::VectorXd& v_in, double dt) {
    if (v_in.size() != g.D.cols()) throw ValidationError("group " + g.id + ": input vector size mismatch");
    discretize(g, dt);
    if (g.s.size() > 0) g.s = g.step_state * g.s + g.step_input * v_in;
    return g.E * g.s + g.F * v_in;
}

GroupStep group_step(const StateSpaceGroup& g, const Eigen::VectorXd& v_in, double dt) {
    GroupStep out{g, {}};
    out.output = group_step_inplace(out.group, v_in, dt);
    return out;
}

}  // namespace cpes::phys
