#pragma once

#include <Eigen/Dense>

namespace dopo {

/// Stationary covariance of d v = A v dt + noise with diffusion D:
/// solves A S + S A^T + D = 0 by Kronecker vectorization (dense, O(n^6)).
/// Throws StabilityError unless every eigenvalue of A has negative real part.
Eigen::MatrixXd lyapunov_stationary(const Eigen::MatrixXd& drift, const Eigen::MatrixXd& diffusion);

/// Largest real part among the eigenvalues of A.
double spectral_abscissa(const Eigen::MatrixXd& drift);

}  // namespace dopo
