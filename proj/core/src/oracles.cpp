#include "dopo/oracles.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dopo/errors.hpp"
#include "dopo/lyapunov.hpp"

namespace dopo {

namespace {

[[noreturn]] void singular(const char* what, double p) {
  std::ostringstream os;
  os << what << " is singular at p = " << p;
  throw SingularPointError(os.str());
}

void require_nonneg(double p, double j) {
  if (!(p >= 0.0) || !(j >= 0.0)) throw ConfigError("p and j must be non-negative");
}

// Pump seen by fluctuations and the site loss of the linearized model.
struct Linear {
  double pump;  // p below threshold, 1 above
  double loss;  // 1 below, 2p - 1 above
};

Linear linear_coefficients(double p) {
  return p > 1.0 ? Linear{1.0, 2.0 * p - 1.0} : Linear{p, 1.0};
}

// Symmetric covariance entries from normal-ordered moments of the pair.
PairCovariance from_pair_moments(double m, double n, double c, double d) {
  return {1.0 + 2.0 * (m + n), 1.0 + 2.0 * (n - m), 2.0 * (c + d), 2.0 * (d - c)};
}

double simpson(auto&& f, double lo, double hi, int intervals) {
  const double h = (hi - lo) / intervals;
  double s = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// g(u) = sqrt(1 + u) - 1 and its remainder g(u) - u/2, both free of cancellation.
double root_minus_one(double u) { return u / (std::sqrt(1.0 + u) + 1.0); }
double root_remainder(double u) { return -u * root_minus_one(u) / (2.0 * (std::sqrt(1.0 + u) + 1.0)); }

}  // namespace

Regime classify(double p) {
  if (std::abs(p - 1.0) < kThresholdWindow) return Regime::Threshold;
  return p < 1.0 ? Regime::Below : Regime::Above;
}

QuadratureVariances single_dopo_variances(double p) {
  require_nonneg(p, 0.0);
  switch (classify(p)) {
    case Regime::Below:
      return {0.5 + p / (2.0 * (1.0 - p)), 0.5 - p / (2.0 * (1.0 + p))};
    case Regime::Above:
      return {0.5 + 1.0 / (4.0 * (p - 1.0)), 0.5 - 1.0 / (4.0 * p)};
    case Regime::Threshold:
      break;
  }
  singular("single-DOPO X variance", p);
}

QuadratureVariances single_dopo_lyapunov(double p) {
  const Linear lin = linear_coefficients(p);
  Eigen::Matrix2d a;
  a << -lin.loss, lin.pump, lin.pump, -lin.loss;
  const Eigen::MatrixXd s = lyapunov_stationary(a, lin.pump * Eigen::Matrix2d::Identity());
  return {0.5 + s(0, 0) + s(0, 1), 0.5 + s(0, 1) - s(0, 0)};
}

PairCovariance pair_covariance_analytic(double p, double j) {
  require_nonneg(p, j);
  switch (classify(p)) {
    case Regime::Below: {
      const double lx = 1.0 - p, lp = 1.0 + p;
      return {1.0 + p * (lx + j) / (lx * (lx + 2.0 * j)), 1.0 - p * (lp + j) / (lp * (lp + 2.0 * j)),
              p * j / (lx * (lx + 2.0 * j)), -p * j / (lp * (lp + 2.0 * j))};
    }
    case Regime::Above: {
      const double q = p - 1.0;
      return {1.0 + (2.0 * q + j) / (4.0 * q * (q + j)), 1.0 - (2.0 * p + j) / (4.0 * p * (p + j)),
              j / (4.0 * q * (q + j)), -j / (4.0 * p * (p + j))};
    }
    case Regime::Threshold:
      break;
  }
  singular("pair covariance", p);
}

LinearizedSystem pair_linear_system(double p, double j) {
  const Linear lin = linear_coefficients(p);
  const double diag = -(lin.loss + j);
  Eigen::MatrixXd a(4, 4);
  a << diag, lin.pump, j, 0.0,
       lin.pump, diag, 0.0, j,
       j, 0.0, diag, lin.pump,
       0.0, j, lin.pump, diag;
  return {a, lin.pump * Eigen::MatrixXd::Identity(4, 4)};
}

PairCovariance pair_covariance_lyapunov(double p, double j) {
  const LinearizedSystem sys = pair_linear_system(p, j);
  const Eigen::MatrixXd s = lyapunov_stationary(sys.drift, sys.diffusion);
  return from_pair_moments(s(0, 0), s(0, 1), s(0, 2), s(1, 2));
}

double duan_closed(double p, double j) {
  if (p >= 1.0 - kThresholdWindow) return 1.0 - (j - 1.0) / (4.0 * p * (p - 1.0 + j));
  return 1.0 - p * (j - p) / ((1.0 + p) * (1.0 - p + 2.0 * j));
}

double simon_closed(double p, double j) {
  const double sq = p >= 1.0 - kThresholdWindow ? 1.0 - (2.0 * j - 1.0) / (4.0 * p * (p - 1.0 + j))
                                                : 1.0 - p * (2.0 * j - p) / ((1.0 + p) * (1.0 - p + 2.0 * j));
  return std::sqrt(sq);
}

PairCriteria pair_criteria_analytic(double p, double j) {
  require_nonneg(p, j);
  PairCriteria out;
  out.duan_closed = duan_closed(p, j);
  out.simon_closed = simon_closed(p, j);
  if (classify(p) == Regime::Threshold) {
    // The covariance diverges but these metrics stay finite; take the
    // two-sided average just off threshold.
    const PairCovariance lo = pair_covariance_analytic(1.0 - kThresholdProbe, j);
    const PairCovariance hi = pair_covariance_analytic(1.0 + kThresholdProbe, j);
    out.duan = 0.5 * (duan_criterion(lo) + duan_criterion(hi));
    out.simon = 0.5 * (simon_criterion(lo) + simon_criterion(hi));
    out.discord = 0.5 * (gaussian_discord(lo) + gaussian_discord(hi));
    return out;
  }
  out.cov = pair_covariance_analytic(p, j);
  out.duan = duan_criterion(*out.cov);
  out.simon = simon_criterion(*out.cov);
  out.discord = gaussian_discord(*out.cov);
  return out;
}

FourierMoments fourier_moments_analytic(double p, double j, double theta) {
  require_nonneg(p, j);
  const Linear lin = linear_coefficients(p);
  const double loss = lin.loss + j * (1.0 - std::cos(theta));
  const double q = lin.pump;
  const double gap = loss - q;  // X-band decay rate
  if (classify(p) == Regime::Threshold) {
    if (std::abs(gap) < 1e-12) singular("lossless k-mode", p);
  } else if (!(gap > 0.0)) {
    singular("lossless k-mode", p);
  }
  const double denom = 2.0 * gap * (loss + q);
  return {q * loss / denom, q * q / denom};
}

FourierMoments fourier_moments_lyapunov(double p, double j, double theta) {
  const Linear lin = linear_coefficients(p);
  const double loss = lin.loss + j * (1.0 - std::cos(theta));
  Eigen::Matrix2d a;
  a << -loss, lin.pump, lin.pump, -loss;
  const Eigen::MatrixXd s = lyapunov_stationary(a, lin.pump * Eigen::Matrix2d::Identity());
  return {s(0, 0), s(0, 1)};
}

LossSpectrum loss_spectrum(double p, double j, double theta) {
  require_nonneg(p, j);
  const double band = j * (1.0 - std::cos(theta));
  if (p > 1.0) return {2.0 * (p - 1.0) + band, 2.0 * p + band};
  return {1.0 - p + band, 1.0 + p + band};
}

double extended_duan_analytic(double p, double j) {
  require_nonneg(p, j);
  const Linear lin = linear_coefficients(p);
  const double q = lin.pump;
  const double loss0 = lin.loss;
  const double loss_pi = lin.loss + 2.0 * j;
  if (!(loss_pi - q > 0.0)) singular("extended Duan value", p);
  return 1.0 - q / (2.0 * (loss0 + q)) + q / (2.0 * (loss_pi - q));
}

double nn_duan_infinite_margin(double p, double j) {
  require_nonneg(p, j);
  if (j == 0.0) return 0.0;
  const LossSpectrum band0 = loss_spectrum(p, j, 0.0);
  const double psi = p >= 1.0 ? 1.0 : p;
  const double q = p >= 1.0 ? 1.0 : p;
  // D(1)/2 = 1 - (psi/j)[-1 + sqrt(1 + u_x)/2 + sqrt(1 + u_p)/2].
  const double u_x = -2.0 * j / (band0.gamma_x + 2.0 * j);
  const double u_p = 2.0 * j / band0.gamma_p;
  const double sum_u = 4.0 * j * (j - q) / (band0.gamma_p * (band0.gamma_x + 2.0 * j));
  const double bracket = 0.5 * (0.5 * sum_u + root_remainder(u_x) + root_remainder(u_p));
  return psi / j * bracket;
}

double nn_duan_infinite(double p, double j) {
  return 1.0 - nn_duan_infinite_margin(p, j);
}

PairCovariance lattice_pair_covariance(double p, double j, int n, int r) {
  if (n < 2) throw ConfigError("lattice needs N >= 2");
  double sum_x = 0.0, sum_p = 0.0, cross_x = 0.0, cross_p = 0.0;
  for (int k = 0; k < n; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / n;
    const FourierMoments f = fourier_moments_analytic(p, j, theta);
    const double c = std::cos(theta * r);
    sum_x += f.fm2 + f.fn2;
    sum_p += f.fn2 - f.fm2;
    cross_x += (f.fm2 + f.fn2) * c;
    cross_p += (f.fn2 - f.fm2) * c;
  }
  const double w = 2.0 / n;
  return {1.0 + w * sum_x, 1.0 + w * sum_p, w * cross_x, w * cross_p};
}

double lattice_duan(double p, double j, int n, int r) {
  return duan_criterion(lattice_pair_covariance(p, j, n, r));
}

LatticeCorrelation longrange_correlation(double p, double j, int r) {
  require_nonneg(p, j);
  if (!(j > 0.0)) throw ConfigError("long-range correlations need j > 0");
  if (r < 1) throw ConfigError("site distance must be >= 1");
  if (classify(p) == Regime::Threshold) singular("X correlation length", p);
  LatticeCorrelation lc;
  lc.r = r;
  lc.psi = p > 1.0 ? 1.0 : p;
  const double centre = p > 1.0 ? 2.0 * p - 1.0 : 1.0;
  const double shift = p > 1.0 ? 1.0 : p;
  lc.m_minus = std::sqrt(2.0 * (centre - shift) / j);
  lc.m_plus = std::sqrt(2.0 * (centre + shift) / j);
  const double mm = lc.m_minus, mp = lc.m_plus, psi = lc.psi;
  lc.a1 = 1.0 + psi / (j * mm);
  lc.a2 = 1.0 - psi / (j * mp);
  lc.c1 = psi * std::exp(-mm * r) / (j * mm);
  lc.c2 = -psi * std::exp(-mp * r) / (j * mp);
  lc.duan = 1.0 + psi / (2.0 * j) * ((1.0 - std::exp(-mm * r)) / mm - (1.0 + std::exp(-mp * r)) / mp);
  const double x_part =
      1.0 + psi / j * (1.0 - mm / std::sqrt(mm * mm + 4.0) - (std::exp(-mm * r) - std::exp(-mm)) / mm);
  const double p_part =
      1.0 + psi / j * (1.0 - std::sqrt(mp * mp + 4.0) / mp - (std::exp(-mp * r) - std::exp(-mp)) / mp);
  lc.duan_corrected = 0.5 * (x_part + p_part);
  return lc;
}

PairCovariance parabolic_integral_covariance(double p, double j, int r) {
  const LatticeCorrelation lc = longrange_correlation(p, j, r);
  const double pi = std::numbers::pi;
  auto integral = [&](double m, int dist) {
    return simpson([m, dist](double t) { return std::cos(t * dist) / (t * t + m * m); }, -pi, pi, 200000);
  };
  const double scale = lc.psi / (pi * j);
  return {1.0 + scale * integral(lc.m_minus, 0), 1.0 - scale * integral(lc.m_plus, 0),
          scale * integral(lc.m_minus, r), -scale * integral(lc.m_plus, r)};
}

PairCovariance meanfield_covariance_analytic(double p, double j) {
  require_nonneg(p, j);
  if (p >= 1.0 - kThresholdWindow) {
    return {1.0 + 1.0 / (2.0 * (p - 1.0) + j), 1.0 - 1.0 / (2.0 * p + j), 0.0, 0.0};
  }
  const double denom = 1.0 - p + j;
  if (!(denom > 0.0)) singular("mean-field X variance", p);
  return {1.0 + p / denom, 1.0 - p / (1.0 + p + j), 0.0, 0.0};
}

PairCovariance meanfield_covariance_lyapunov(double p, double j) {
  // The neighbour enters only through its mean, so each DOPO is a single
  // mode with extra loss j and no cross-correlation.
  const Linear lin = linear_coefficients(p);
  Eigen::Matrix2d a;
  a << -(lin.loss + j), lin.pump, lin.pump, -(lin.loss + j);
  const Eigen::MatrixXd s = lyapunov_stationary(a, lin.pump * Eigen::Matrix2d::Identity());
  return from_pair_moments(s(0, 0), s(0, 1), 0.0, 0.0);
}

FiniteNpFluctuations finite_np_fluctuations(double p, double j, int np) {
  require_nonneg(p, j);
  if (np < 1) throw ConfigError("Np must be >= 1");
  if (classify(p) == Regime::Threshold) singular("finite-Np X fluctuations", p);
  const double inv = 1.0 / np;
  FiniteNpFluctuations f;
  if (p < 1.0) {
    const double lx = 1.0 - p, lp = 1.0 + p;
    f.var_x1 = 0.5 + p / (2.0 * (lx + j)) + inv * p * j * j / (2.0 * lx * (lx + 2.0 * j) * (lx + j));
    f.cov_x12 = inv * p * j / (2.0 * lx * (lx + 2.0 * j));
    f.var_p1 = 0.5 - p / (2.0 * (lp + j)) - inv * p * j * j / (2.0 * lp * (lp + 2.0 * j) * (lp + j));
    f.cov_p12 = -inv * p * j / (2.0 * lp * (lp + 2.0 * j));
  } else {
    const double lx = 2.0 * (p - 1.0), lp = 2.0 * p;
    f.var_x1 = 0.5 + 1.0 / (2.0 * (lx + j)) + inv * j * j / (2.0 * lx * (lx + 2.0 * j) * (lx + j));
    f.cov_x12 = inv * j / (2.0 * lx * (lx + 2.0 * j));
    f.var_p1 = 0.5 - 1.0 / (2.0 * (lp + j)) - inv * j * j / (2.0 * lp * (lp + 2.0 * j) * (lp + j));
    f.cov_p12 = -inv * j / (2.0 * lp * (lp + 2.0 * j));
  }
  return f;
}

}  // namespace dopo
