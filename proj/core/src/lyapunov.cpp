#include "dopo/lyapunov.hpp"

#include <sstream>

#include <Eigen/Eigenvalues>

#include "dopo/errors.hpp"

namespace dopo {

double spectral_abscissa(const Eigen::MatrixXd& drift) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(drift, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solve failed");
  return solver.eigenvalues().real().maxCoeff();
}

Eigen::MatrixXd lyapunov_stationary(const Eigen::MatrixXd& drift, const Eigen::MatrixXd& diffusion) {
  const Eigen::Index n = drift.rows();
  if (drift.cols() != n || diffusion.rows() != n || diffusion.cols() != n) {
    throw NumericalError("lyapunov_stationary: shape mismatch");
  }
  const double abscissa = spectral_abscissa(drift);
  if (!(abscissa < 0.0)) {
    std::ostringstream os;
    os << "drift matrix is not Hurwitz (max Re eigenvalue " << abscissa << ")";
    throw StabilityError(os.str());
  }
  // vec(A S + S A^T) = (I kron A + A kron I) vec(S), column-major vec.
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd k(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) = eye(i, j) * drift + drift(i, j) * eye;
    }
  }
  const Eigen::VectorXd rhs = -diffusion.reshaped();
  const Eigen::VectorXd x = k.fullPivLu().solve(rhs);
  const Eigen::MatrixXd s = x.reshaped(n, n);
  return 0.5 * (s + s.transpose());
}

}  // namespace dopo
