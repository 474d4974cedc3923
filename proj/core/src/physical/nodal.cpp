#include "cpes/physical/nodal.hpp"

#include <cassert>

#include "cpes/error.hpp"

namespace cpes::phys {

template <class Scalar>
double nodal_residual(const NodalBoundary<Scalar>& b) {
    if (b.V.size() == 0) return 0.0;
    return (b.Y * b.V - b.I).template lpNorm<Eigen::Infinity>();
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodal_solve(const NodalBoundary<Scalar>& b) {
    const auto n = b.Y.rows();
    if (b.Y.cols() != n) throw SimulationError("admittance matrix must be square", 0);
    if (b.I.size() != n) throw SimulationError("injection vector size does not match Y", 0);
    if (n == 0) return {};

    Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(b.Y);
    const double rcond = lu.rcond();
    if (!(rcond > 0.0) || 1.0 / rcond > kMaxConditionEstimate)
        throw SimulationError("singular or ill-conditioned nodal system", 0);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = lu.solve(b.I);
#ifndef NDEBUG
    NodalBoundary<Scalar> solved{b.Y, b.I, v};
    assert(nodal_residual(solved) < 1e-9);
#endif
    return v;
}

template Eigen::VectorXd nodal_solve<double>(const RealBoundary&);
template Eigen::VectorXcd nodal_solve<std::complex<double>>(const ComplexBoundary&);
template double nodal_residual<double>(const RealBoundary&);
template double nodal_residual<std::complex<double>>(const ComplexBoundary&);

}  // namespace cpes::phys
