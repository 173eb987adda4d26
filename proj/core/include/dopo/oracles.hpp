#pragma once

#include <optional>

#include "dopo/gaussian.hpp"
#include "dopo/model.hpp"

namespace dopo {

/// Closed-form stationary statistics of single, paired, ring and mean-field
/// DOPO networks in the linearized (Gaussian) regime, plus brute-force
/// Lyapunov counterparts. All moments are positive-P (normal-ordered) unless
/// stated otherwise; covariances are symmetric-ordered with vacuum = 1.

enum class Regime { Below, Threshold, Above };

inline constexpr double kThresholdWindow = 1e-9;
/// Offset from p = 1 at which quantities with a finite threshold limit are
/// evaluated when that limit has no closed form.
inline constexpr double kThresholdProbe = 1e-6;

Regime classify(double p);

struct QuadratureVariances {
  double var_x = 0.5;
  double var_p = 0.5;
};

/// <dX^2>, <dP^2> of one DOPO. Throws SingularPointError at threshold.
QuadratureVariances single_dopo_variances(double p);
QuadratureVariances single_dopo_lyapunov(double p);

/// Two dissipatively coupled DOPOs. Throws SingularPointError at threshold.
PairCovariance pair_covariance_analytic(double p, double j);
PairCovariance pair_covariance_lyapunov(double p, double j);

/// Real drift and diffusion of the linearized pair in (a1, a1^dag, a2, a2^dag).
LinearizedSystem pair_linear_system(double p, double j);

/// Closed-form Duan value and smallest partially-transposed symplectic
/// eigenvalue; both are finite through threshold.
double duan_closed(double p, double j);
double simon_closed(double p, double j);

struct PairCriteria {
  std::optional<PairCovariance> cov;  // empty at threshold
  double duan = 1.0;                  // from the covariance (limit at threshold)
  double simon = 1.0;
  double discord = 0.0;
  double duan_closed = 1.0;
  double simon_closed = 1.0;
};

PairCriteria pair_criteria_analytic(double p, double j);

/// k-mode moments <da_k da_-k> and <da_k^dag da_k> of a ring, theta = 2 pi k / N.
struct FourierMoments {
  double fm2 = 0.0;
  double fn2 = 0.0;
};
FourierMoments fourier_moments_analytic(double p, double j, double theta);
FourierMoments fourier_moments_lyapunov(double p, double j, double theta);

/// Normalized decay rates of the X- and P-like bands.
struct LossSpectrum {
  double gamma_x = 1.0;
  double gamma_p = 1.0;
};
LossSpectrum loss_spectrum(double p, double j, double theta);

/// Extended lattice criterion D'/N (independent of even N).
double extended_duan_analytic(double p, double j);

/// Nearest-neighbour Duan value on an infinite ring, and 1 minus it evaluated
/// without cancellation (useful far above threshold where the value rounds
/// to 1). Returns 1 (margin 0) for j = 0.
double nn_duan_infinite(double p, double j);
double nn_duan_infinite_margin(double p, double j);

/// Exact finite-ring covariance and Duan value between sites distance r apart.
PairCovariance lattice_pair_covariance(double p, double j, int n, int r);
double lattice_duan(double p, double j, int n, int r);

/// Long-range correlations in the parabolic-band approximation.
struct LatticeCorrelation {
  double m_minus = 0.0;
  double m_plus = 0.0;
  double psi = 0.0;
  int r = 1;
  double a1 = 1.0, a2 = 1.0, c1 = 0.0, c2 = 0.0;
  double duan = 1.0;            // from the exponential tails alone
  double duan_corrected = 1.0;  // with exact nearest-neighbour terms
};
LatticeCorrelation longrange_correlation(double p, double j, int r);

/// The same parabolic-band integrals evaluated by quadrature over
/// theta in [-pi, pi] instead of the infinite-range contour result.
PairCovariance parabolic_integral_covariance(double p, double j, int r);

/// Mean-field-coupled pair (c1 = c2 = 0).
PairCovariance meanfield_covariance_analytic(double p, double j);
PairCovariance meanfield_covariance_lyapunov(double p, double j);

/// Finite-particle mean-field fluctuations.
struct FiniteNpFluctuations {
  double var_x1 = 0.5;
  double cov_x12 = 0.0;
  double var_p1 = 0.5;
  double cov_p12 = 0.0;
};
FiniteNpFluctuations finite_np_fluctuations(double p, double j, int np);

}  // namespace dopo
