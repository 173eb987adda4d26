#pragma once

#include <Eigen/Dense>

#include "dopo/config.hpp"
#include "dopo/moments.hpp"

namespace dopo {

/// Symmetric two-mode covariance in the reduced form
///   sigma = [[A, C], [C, A]], A = diag(a1, a2), C = diag(c1, c2)
/// over sqrt(2) (X1, P1, X2, P2); vacuum is (1, 1, 0, 0).
struct PairCovariance {
  double a1 = 1.0;
  double a2 = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;

  Eigen::Matrix4d matrix() const;
};

/// Slack on the uncertainty bound for analytic covariances.
inline constexpr double kPhysicalSlack = 1e-6;
/// Band below 1 within which sampled covariances are projected.
inline constexpr double kStatisticalSlack = 0.02;

/// Covariance between sites r and s of a moment set, converted to symmetric
/// ordering for `representation` and symmetrized over (r, s).
PairCovariance pair_covariance(const MomentSet& moments, int r, int s, Representation representation);

/// Translation average over all site pairs (r, r + distance) of a ring.
PairCovariance ring_pair_covariance(const MomentSet& moments, int distance, Representation representation);

struct SymplecticPair {
  double nu_plus = 1.0;
  double nu_minus = 1.0;
};

/// Reduced-form path: nu^2 = (a1 + c1)(a2 + c2) and (a1 - c1)(a2 - c2).
/// Throws InvalidCovarianceError if either product is negative.
SymplecticPair symplectic_eigenvalues(const PairCovariance& cov);

/// General path: moduli of the eigenvalues of i Omega sigma, paired.
SymplecticPair symplectic_eigenvalues(const Eigen::Matrix4d& sigma);

/// Duan value D/2 = ((a1 - c1) + (a2 + c2)) / 2.
double duan_criterion(const PairCovariance& cov);

/// Smallest symplectic eigenvalue of the partial transpose (P2 -> -P2).
double simon_criterion(const PairCovariance& cov);
double simon_criterion(const Eigen::Matrix4d& sigma);

/// f(x) = ((x+1)/2) ln((x+1)/2) - ((x-1)/2) ln((x-1)/2); natural log.
/// Arguments in [1 - kPhysicalSlack, 1] are clamped to 1.
double entropy_function(double x);

/// det of the conditional covariance after a diag(lambda, 1/lambda) measurement.
double conditional_det(const PairCovariance& cov, double lambda);

/// Closed-form infimum (lambda -> 0 limit) and the numerically minimized one.
double min_conditional_det_closed(const PairCovariance& cov);
double min_conditional_det_numeric(const PairCovariance& cov);

/// True when the closed-form infimum applies.
bool closed_form_infimum_applies(const PairCovariance& cov);

/// Gaussian discord in nats.
double gaussian_discord(const PairCovariance& cov);

struct CorrelationReport {
  double var_x = 0.0;
  double var_p = 0.0;
  double duan = 1.0;
  double nu_plus = 1.0;
  double nu_minus = 1.0;
  double simon = 1.0;
  double discord = 0.0;
  bool entangled_sufficient = false;
  bool entangled = false;
};

CorrelationReport correlation_report(const PairCovariance& cov);

struct Projection {
  PairCovariance cov;
  double inflation = 0.0;  // delta added to both diagonals
  bool projected = false;
};

/// Minimal sigma + delta I making nu_minus = 1, applied only when nu_minus
/// lies in [1 - kStatisticalSlack, 1). Throws InvalidCovarianceError below
/// the band.
Projection project_physical(const PairCovariance& cov);

/// Extended lattice criterion D'/N from the k = 0 and k = N/2 modes.
double extended_duan(const MomentSet& moments, Representation representation);

}  // namespace dopo
