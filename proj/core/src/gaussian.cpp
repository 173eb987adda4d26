#include "dopo/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "dopo/errors.hpp"

namespace dopo {

Eigen::Matrix4d PairCovariance::matrix() const {
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s(0, 0) = s(2, 2) = a1;
  s(1, 1) = s(3, 3) = a2;
  s(0, 2) = s(2, 0) = c1;
  s(1, 3) = s(3, 1) = c2;
  return s;
}

PairCovariance pair_covariance(const MomentSet& moments, int r, int s, Representation representation) {
  if (moments.empty()) throw ConfigError("pair_covariance needs a non-empty MomentSet");
  const QuadratureMoments q = quadrature_moments(moments, r, s, ordering_offset(representation));
  PairCovariance cov;
  cov.a1 = q.var_x_r + q.var_x_s;  // 2 * mean of the two sites
  cov.a2 = q.var_p_r + q.var_p_s;
  cov.c1 = 2.0 * q.cov_x;
  cov.c2 = 2.0 * q.cov_p;
  return cov;
}

PairCovariance ring_pair_covariance(const MomentSet& moments, int distance, Representation representation) {
  const int n = moments.sites();
  if (n < 2) throw ConfigError("ring_pair_covariance needs at least two sites");
  PairCovariance acc{0.0, 0.0, 0.0, 0.0};
  for (int r = 0; r < n; ++r) {
    const PairCovariance c = pair_covariance(moments, r, ((r + distance) % n + n) % n, representation);
    acc.a1 += c.a1 / n;
    acc.a2 += c.a2 / n;
    acc.c1 += c.c1 / n;
    acc.c2 += c.c2 / n;
  }
  return acc;
}

SymplecticPair symplectic_eigenvalues(const PairCovariance& cov) {
  const double sum_mode = (cov.a1 + cov.c1) * (cov.a2 + cov.c2);
  const double diff_mode = (cov.a1 - cov.c1) * (cov.a2 - cov.c2);
  if (sum_mode < 0.0 || diff_mode < 0.0) {
    throw InvalidCovarianceError("negative squared symplectic eigenvalue");
  }
  const double x = std::sqrt(sum_mode);
  const double y = std::sqrt(diff_mode);
  return {std::max(x, y), std::min(x, y)};
}

SymplecticPair symplectic_eigenvalues(const Eigen::Matrix4d& sigma) {
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 1) = omega(2, 3) = 1.0;
  omega(1, 0) = omega(3, 2) = -1.0;
  Eigen::EigenSolver<Eigen::Matrix4d> solver(omega * sigma, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen decomposition of Omega sigma failed");
  std::array<double, 4> mod{};
  for (int i = 0; i < 4; ++i) mod[i] = std::abs(solver.eigenvalues()(i));
  std::sort(mod.begin(), mod.end(), std::greater<>());
  return {0.5 * (mod[0] + mod[1]), 0.5 * (mod[2] + mod[3])};
}

double duan_criterion(const PairCovariance& cov) {
  return 0.5 * ((cov.a1 - cov.c1) + (cov.a2 + cov.c2));
}

double simon_criterion(const PairCovariance& cov) {
  const double m1 = (cov.a1 + cov.c1) * (cov.a2 - cov.c2);
  const double m2 = (cov.a1 - cov.c1) * (cov.a2 + cov.c2);
  const double lo = std::min(m1, m2);
  if (lo < 0.0) throw InvalidCovarianceError("negative squared symplectic eigenvalue of the partial transpose");
  return std::sqrt(lo);
}

double simon_criterion(const Eigen::Matrix4d& sigma) {
  const Eigen::Vector4d flip(1.0, 1.0, 1.0, -1.0);
  const Eigen::Matrix4d transposed = flip.asDiagonal() * sigma * flip.asDiagonal();
  return symplectic_eigenvalues(transposed).nu_minus;
}

double entropy_function(double x) {
  if (!(x >= 1.0 - kPhysicalSlack)) {
    throw InvalidCovarianceError("entropy argument below the uncertainty bound");
  }
  if (x <= 1.0) return 0.0;
  const double h = 0.5 * (x - 1.0);
  if (x - 1.0 < 1e-8) return h + 0.5 * h * h - h * std::log(h);
  return (1.0 + h) * std::log1p(h) - h * std::log(h);
}

double conditional_det(const PairCovariance& c, double lambda) {
  return (c.a1 - c.c1 * c.c1 / (lambda + c.a1)) * (c.a2 - c.c2 * c.c2 / (1.0 / lambda + c.a2));
}

double min_conditional_det_closed(const PairCovariance& c) {
  return c.a2 / c.a1 * (c.a1 * c.a1 - c.c1 * c.c1);
}

double min_conditional_det_numeric(const PairCovariance& c) {
  const double at_zero = min_conditional_det_closed(c);
  const double at_infinity = c.a1 / c.a2 * (c.a2 * c.a2 - c.c2 * c.c2);
  auto f = [&c](double t) { return conditional_det(c, std::exp(t)); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = -12.0;
  double hi = 12.0;
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    }
  }
  // The search box is finite; the infimum may sit at either end of the
  // half-line, where the limits are known exactly.
  return std::min({f1, f2, at_zero, at_infinity});
}

bool closed_form_infimum_applies(const PairCovariance& c) {
  const double c1s = c.c1 * c.c1;
  const double c2s = c.c2 * c.c2;
  const double first = c.a2 * c1s - c.a1 * c2s * (c.a1 * c.a1 - c1s);
  const double second = c.a2 * c1s * (c.a2 * c.a2 - c2s) - c.a1 * c2s;
  return first * second >= 0.0;
}

double gaussian_discord(const PairCovariance& cov) {
  if (cov.c1 == 0.0 && cov.c2 == 0.0) return 0.0;
  const SymplecticPair nu = symplectic_eigenvalues(cov);
  const double det_eps =
      closed_form_infimum_applies(cov) ? min_conditional_det_closed(cov) : min_conditional_det_numeric(cov);
  if (det_eps < 0.0) throw InvalidCovarianceError("negative conditional determinant");
  const double d = entropy_function(std::sqrt(cov.a1 * cov.a2)) + entropy_function(std::sqrt(det_eps)) -
                   entropy_function(nu.nu_plus) - entropy_function(nu.nu_minus);
  return std::max(0.0, d);
}

CorrelationReport correlation_report(const PairCovariance& cov) {
  CorrelationReport rep;
  rep.var_x = 0.5 * cov.a1;
  rep.var_p = 0.5 * cov.a2;
  rep.duan = duan_criterion(cov);
  const SymplecticPair nu = symplectic_eigenvalues(cov);
  rep.nu_plus = nu.nu_plus;
  rep.nu_minus = nu.nu_minus;
  rep.simon = simon_criterion(cov);
  rep.discord = gaussian_discord(cov);
  rep.entangled_sufficient = rep.duan < 1.0;
  rep.entangled = rep.simon < 1.0;
  return rep;
}

Projection project_physical(const PairCovariance& cov) {
  const double x_sum = cov.a1 + cov.c1, p_sum = cov.a2 + cov.c2;
  const double x_diff = cov.a1 - cov.c1, p_diff = cov.a2 - cov.c2;
  const bool sum_is_minus = x_sum * p_sum < x_diff * p_diff;
  const double x1 = sum_is_minus ? x_sum : x_diff;
  const double x2 = sum_is_minus ? p_sum : p_diff;
  const double nu_sq = x1 * x2;
  const double floor = 1.0 - kStatisticalSlack;
  if (x1 > 0.0 && x2 > 0.0 && nu_sq >= 1.0) return {cov, 0.0, false};
  if (!(x1 > 0.0 && x2 > 0.0 && nu_sq >= floor * floor)) {
    throw InvalidCovarianceError("sampled covariance violates the uncertainty bound beyond statistical slack");
  }
  const double delta = 0.5 * (-(x1 + x2) + std::sqrt((x1 - x2) * (x1 - x2) + 4.0));
  PairCovariance out = cov;
  out.a1 += delta;
  out.a2 += delta;
  return {out, delta, true};
}

double extended_duan(const MomentSet& moments, Representation representation) {
  const int n = moments.sites();
  if (n < 2 || n % 2 != 0) throw ConfigError("extended Duan criterion needs an even number of sites");
  const double offset = ordering_offset(representation);
  const double ns0 = moments.fn2(0).real() + offset;
  const double ns_half = moments.fn2(n / 2).real() + offset;
  return ns0 - moments.fm2(0).real() + ns_half + moments.fm2(n / 2).real();
}

}  // namespace dopo
