#pragma once

#include <complex>

#include <Eigen/Dense>

namespace cpes::phys {

/// Shared boundary quantities between state-space groups: Y V = I.
template <class Scalar>
struct NodalBoundary {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> Y;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> I;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> V;
};

using RealBoundary = NodalBoundary<double>;
using ComplexBoundary = NodalBoundary<std::complex<double>>;

inline constexpr double kMaxConditionEstimate = 1e12;

/// Dense LU with partial pivoting. Throws cpes::SimulationError when Y is not
/// square, sizes disagree, or the condition estimate exceeds 1e12.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodal_solve(const NodalBoundary<Scalar>& b);

/// ||Y V - I||_inf
template <class Scalar>
double nodal_residual(const NodalBoundary<Scalar>& b);

extern template Eigen::VectorXd nodal_solve<double>(const RealBoundary&);
extern template Eigen::VectorXcd nodal_solve<std::complex<double>>(const ComplexBoundary&);
extern template double nodal_residual<double>(const RealBoundary&);
extern template double nodal_residual<std::complex<double>>(const ComplexBoundary&);

}  // namespace cpes::phys
