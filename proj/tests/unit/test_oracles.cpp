#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dopo/errors.hpp"
#include "dopo/lyapunov.hpp"
#include "dopo/oracles.hpp"
#include "support.hpp"

using namespace dopo;
using doctest::Approx;

namespace {

constexpr double kJ = 7.0 / 3.0;
constexpr double kPi = std::numbers::pi;

double max_abs_diff(const PairCovariance& x, const PairCovariance& y) {
  return std::max({std::abs(x.a1 - y.a1), std::abs(x.a2 - y.a2), std::abs(x.c1 - y.c1), std::abs(x.c2 - y.c2)});
}

double scale_of(const PairCovariance& c) {
  return std::max({1.0, std::abs(c.a1), std::abs(c.a2), std::abs(c.c1), std::abs(c.c2)});
}

}  // namespace

TEST_CASE("regime classification") {
  CHECK(classify(0.3) == Regime::Below);
  CHECK(classify(1.0) == Regime::Threshold);
  CHECK(classify(1.0 + 0.5e-9) == Regime::Threshold);
  CHECK(classify(1.0 + 2e-9) == Regime::Above);
}

TEST_CASE("single DOPO") {
  const QuadratureVariances vac = single_dopo_variances(0.0);
  CHECK(vac.var_x == 0.5);
  CHECK(vac.var_p == 0.5);
  CHECK(single_dopo_variances(1.0 - 1e-8).var_p == Approx(0.25).epsilon(1e-6));
  const QuadratureVariances above = single_dopo_variances(3.0);
  CHECK(above.var_x == Approx(0.625));
  CHECK(above.var_p == Approx(0.41667).epsilon(1e-5));
  CHECK_THROWS_AS(single_dopo_variances(1.0), SingularPointError);
  for (double p : {0.1, 0.5, 0.9, 1.2, 3.0}) {
    const QuadratureVariances a = single_dopo_variances(p), l = single_dopo_lyapunov(p);
    CHECK(a.var_x == Approx(l.var_x).epsilon(1e-12));
    CHECK(a.var_p == Approx(l.var_p).epsilon(1e-12));
  }
}

TEST_CASE("pair covariance values") {
  const PairCovariance low = pair_covariance_analytic(0.5, kJ);
  CHECK(low.a1 == Approx(1.548387).epsilon(1e-6));
  CHECK(low.a2 == Approx(0.792793).epsilon(1e-6));
  CHECK(low.c1 == Approx(0.451613).epsilon(1e-6));
  CHECK(low.c2 == Approx(-0.126126).epsilon(1e-6));
  const PairCovariance high = pair_covariance_analytic(2.0, kJ);
  CHECK(high.a1 == Approx(1.325).epsilon(1e-12));
  CHECK(high.c1 == Approx(0.175).epsilon(1e-12));
  for (double p : {0.3, 1.7}) {
    const PairCovariance d = pair_covariance_analytic(p, 0.0);
    const QuadratureVariances s = single_dopo_variances(p);
    CHECK(d.c1 == 0.0);
    CHECK(d.c2 == 0.0);
    CHECK(d.a1 == Approx(2.0 * s.var_x));
    CHECK(d.a2 == Approx(2.0 * s.var_p));
  }
  CHECK(pair_covariance_analytic(0.0, kJ).a1 == 1.0);
  CHECK_THROWS_AS(pair_covariance_analytic(1.0, kJ), SingularPointError);
  CHECK_THROWS_AS(pair_covariance_analytic(-0.1, kJ), ConfigError);
}

TEST_CASE("property: closed forms equal the Lyapunov solution") {
  for (double p = 0.0; p <= 3.0; p += 0.0125) {
    if (std::abs(p - 1.0) < 1e-3) continue;
    for (double j : {0.0, 0.1, 0.5, 1.0, kJ, 4.0, 10.0}) {
      const PairCovariance a = pair_covariance_analytic(p, j), l = pair_covariance_lyapunov(p, j);
      CHECK(max_abs_diff(a, l) <= 1e-12 * scale_of(a) * 10);
      const PairCovariance ma = meanfield_covariance_analytic(p, j), ml = meanfield_covariance_lyapunov(p, j);
      if (j > 0.0 || std::abs(p - 1.0) > 0.05) CHECK(max_abs_diff(ma, ml) <= 1e-11 * scale_of(ma));
      for (double theta : {kPi / 7, kPi / 2, 2.0, kPi}) {
        const FourierMoments fa = fourier_moments_analytic(p, j, theta);
        const FourierMoments fl = fourier_moments_lyapunov(p, j, theta);
        if (j == 0.0 && p < 1e-12) continue;
        CHECK(std::abs(fa.fm2 - fl.fm2) <= 1e-11 * std::max(1.0, std::abs(fa.fm2)));
        CHECK(std::abs(fa.fn2 - fl.fn2) <= 1e-11 * std::max(1.0, std::abs(fa.fn2)));
      }
    }
  }
}

TEST_CASE("property: branches meet at threshold where the limit is finite") {
  for (double j : {0.5, 1.0, kJ, 10.0}) {
    const PairCovariance lo = pair_covariance_analytic(1.0 - 1e-7, j);
    const PairCovariance hi = pair_covariance_analytic(1.0 + 1e-7, j);
    CHECK(lo.a2 == Approx(hi.a2).epsilon(1e-6));
    CHECK(lo.c2 == Approx(hi.c2).epsilon(1e-6));
    CHECK(duan_closed(1.0 - 1e-7, j) == Approx(duan_closed(1.0 + 1e-7, j)).epsilon(1e-6));
    CHECK(simon_closed(1.0 - 1e-7, j) == Approx(simon_closed(1.0 + 1e-7, j)).epsilon(1e-6));
    const LossSpectrum a = loss_spectrum(1.0 - 1e-9, j, 1.0), b = loss_spectrum(1.0 + 1e-9, j, 1.0);
    CHECK(a.gamma_x == Approx(b.gamma_x).epsilon(1e-8));
    CHECK(a.gamma_p == Approx(b.gamma_p).epsilon(1e-8));
  }
  const PairCriteria at = pair_criteria_analytic(1.0, kJ);
  CHECK_FALSE(at.cov.has_value());
  CHECK(at.duan == Approx(at.duan_closed).epsilon(1e-5));
  CHECK(at.simon == Approx(at.simon_closed).epsilon(1e-5));
  CHECK(at.discord > 0.0);
}

TEST_CASE("pair criteria agree with the closed forms") {
  for (double p : {0.1, 0.5, 0.9, 1.1, 2.0, 3.0}) {
    for (double j : {0.3, 1.0, kJ}) {
      const PairCriteria c = pair_criteria_analytic(p, j);
      REQUIRE(c.cov.has_value());
      CHECK(c.duan == Approx(c.duan_closed).epsilon(1e-12));
      CHECK(c.simon == Approx(c.simon_closed).epsilon(1e-12));
    }
  }
  CHECK(duan_closed(0.6, 0.6) == Approx(1.0).epsilon(1e-15));
  for (double p : {1.2, 2.0, 5.0}) CHECK(simon_closed(p, 0.5) == Approx(1.0).epsilon(1e-15));
  CHECK(pair_criteria_analytic(0.5, kJ).simon == Approx(0.855092).epsilon(1e-6));
}

TEST_CASE("Fourier moments") {
  const FourierMoments f = fourier_moments_analytic(0.5, kJ, kPi);
  const double den = 1.0 + 2.0 * kJ;
  CHECK(f.fm2 == Approx(0.25 * den / (den * den - 0.25)).epsilon(1e-12));
  CHECK(f.fm2 == Approx(0.044464).epsilon(1e-5));
  for (double theta = 0.0; theta < 2.0 * kPi; theta += 0.4) {
    const FourierMoments d = fourier_moments_analytic(0.4, 0.0, theta);
    const QuadratureVariances s = single_dopo_variances(0.4);
    CHECK(0.5 + d.fm2 + d.fn2 == Approx(s.var_x).epsilon(1e-12));
    CHECK(0.5 + d.fn2 - d.fm2 == Approx(s.var_p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(fourier_moments_analytic(1.0, kJ, 0.0), SingularPointError);
  const FourierMoments above = fourier_moments_analytic(2.0, kJ, kPi / 2);
  const FourierMoments above_l = fourier_moments_lyapunov(2.0, kJ, kPi / 2);
  CHECK(above.fm2 == Approx(above_l.fm2).epsilon(1e-12));
  CHECK(above.fn2 == Approx(above_l.fn2).epsilon(1e-12));
}

TEST_CASE("loss spectrum") {
  CHECK(loss_spectrum(1.0, kJ, 0.0).gamma_x == 0.0);
  CHECK(loss_spectrum(0.3, kJ, kPi).gamma_x == Approx(0.7 + 2.0 * kJ));
  const double gx_pi = loss_spectrum(3.0, kJ, kPi).gamma_x, gp_0 = loss_spectrum(3.0, kJ, 0.0).gamma_p;
  CHECK(gx_pi == Approx(4.0 + 14.0 / 3.0));
  CHECK(gp_0 == Approx(6.0));
  CHECK(gx_pi > gp_0);
  CHECK(extended_duan_analytic(3.0, kJ) < 1.0);
  // the same bookkeeping across a grid
  for (double p : {0.2, 0.5, 1.5, 2.5}) {
    for (double j : {0.25, 2.0 / 3.0, 1.5, 4.0}) {
      const bool wider = loss_spectrum(p, j, kPi).gamma_x > loss_spectrum(p, j, 0.0).gamma_p;
      CHECK(wider == (extended_duan_analytic(p, j) < 1.0));
    }
  }
}

TEST_CASE("finite lattice") {
  for (double p : {0.3, 1.5}) {
    const PairCovariance ring2 = lattice_pair_covariance(p, kJ, 2, 1);
    CHECK(max_abs_diff(ring2, pair_covariance_analytic(p, kJ)) < 1e-12);
  }
  const PairCovariance self = lattice_pair_covariance(0.5, kJ, 16, 0);
  CHECK(self.c1 == Approx(self.a1 - 1.0));
  CHECK(lattice_duan(0.5, kJ, 16, 1) == Approx(duan_criterion(lattice_pair_covariance(0.5, kJ, 16, 1))));
  CHECK_THROWS_AS(lattice_pair_covariance(0.5, kJ, 1, 0), ConfigError);
}

TEST_CASE("nearest-neighbour Duan on an infinite ring") {
  auto at_threshold = [](double j) { return 1.0 - (1.0 / j) * (-1.0 + std::sqrt(1.0 + j) / 2.0); };
  for (double j : {0.5, 1.0, 3.0, 8.0}) CHECK(nn_duan_infinite(1.0, j) == Approx(at_threshold(j)).epsilon(1e-12));
  CHECK(nn_duan_infinite(1.0, 3.0) == Approx(1.0).epsilon(1e-14));
  CHECK(nn_duan_infinite(0.7, 0.0) == 1.0);
  CHECK(nn_duan_infinite(0.3, kJ) < 1.0);
  for (double p : {0.3, 0.8, 1.5, 3.0}) {
    CHECK(nn_duan_infinite(p, kJ) == Approx(lattice_duan(p, kJ, 4096, 1)).epsilon(1e-9));
  }
  // far above threshold the sign of the margin flips at j = 2
  CHECK(nn_duan_infinite_margin(1e6, 2.05) > 0.0);
  CHECK(nn_duan_infinite_margin(1e6, 1.95) < 0.0);
}

TEST_CASE("long-range correlations") {
  const LatticeCorrelation lc = longrange_correlation(0.5, kJ, 2);
  CHECK(lc.m_minus == Approx(std::sqrt(2.0 * 0.5 / kJ)).epsilon(1e-12));
  CHECK(lc.m_minus == Approx(0.654654).epsilon(1e-6));
  CHECK(lc.c1 == Approx(0.5 * std::exp(-2.0 * lc.m_minus) / (kJ * lc.m_minus)).epsilon(1e-12));
  CHECK(lc.psi == 0.5);
  CHECK(longrange_correlation(2.0, kJ, 1).psi == 1.0);

  // correlation length scaling
  const double r1 = longrange_correlation(0.9, kJ, 1).m_minus / std::sqrt(0.1);
  const double r2 = longrange_correlation(0.99, kJ, 1).m_minus / std::sqrt(0.01);
  CHECK(r1 == Approx(r2).epsilon(1e-12));

  // distant pairs: tails vanish, Duan tends to its limit
  const LatticeCorrelation far = longrange_correlation(0.95, kJ, 400);
  CHECK(std::abs(far.c1) < 1e-12);
  CHECK(far.duan == Approx(1.0 + far.psi / (2.0 * kJ) * (1.0 / far.m_minus - 1.0 / far.m_plus)).epsilon(1e-10));
  CHECK(far.duan > 1.0);

  double last_c1 = lc.c1 * 10, last_c2 = 1e9;
  for (int r = 1; r < 10; ++r) {
    const LatticeCorrelation x = longrange_correlation(0.7, kJ, r);
    CHECK(x.c1 < last_c1);
    CHECK(std::abs(x.c2) < last_c2);
    last_c1 = x.c1;
    last_c2 = std::abs(x.c2);
  }

  // close to threshold the band edge dominates and the contour result is the
  // parabolic integral
  const PairCovariance q = parabolic_integral_covariance(0.99, kJ, 3);
  const LatticeCorrelation c = longrange_correlation(0.99, kJ, 3);
  CHECK(q.c1 == Approx(c.c1).epsilon(0.05));
  CHECK(q.a1 == Approx(c.a1).epsilon(0.05));

  CHECK_THROWS_AS(longrange_correlation(1.0, kJ, 1), SingularPointError);
  CHECK_THROWS_AS(longrange_correlation(0.5, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(longrange_correlation(0.5, kJ, 0), ConfigError);
}

TEST_CASE("mean-field covariance") {
  CHECK(meanfield_covariance_analytic(0.5, kJ).a1 == Approx(1.0 + 0.5 / (0.5 + kJ)).epsilon(1e-12));
  CHECK(meanfield_covariance_analytic(0.5, kJ).a1 == Approx(1.17647).epsilon(1e-5));
  for (double j : {0.5, kJ}) CHECK(meanfield_covariance_analytic(1.0, j).a1 == Approx(1.0 + 1.0 / j));
  for (double p : {0.3, 2.0}) {
    const PairCovariance mf = meanfield_covariance_analytic(p, 1e-7), full = pair_covariance_analytic(p, 1e-7);
    CHECK(mf.a1 == Approx(full.a1).epsilon(1e-6));
    CHECK(mf.a2 == Approx(full.a2).epsilon(1e-6));
    CHECK(mf.c1 == 0.0);
  }
}

TEST_CASE("finite particle number") {
  const double p = 0.5;
  const FiniteNpFluctuations one = finite_np_fluctuations(p, kJ, 1);
  CHECK(one.cov_x12 == Approx(p * kJ / (2.0 * (1.0 - p) * (1.0 - p + 2.0 * kJ))).epsilon(1e-12));
  CHECK(one.cov_x12 == Approx(pair_covariance_analytic(p, kJ).c1 / 2.0).epsilon(1e-12));
  const FiniteNpFluctuations five = finite_np_fluctuations(p, kJ, 5);
  const double expected = 0.5 + 0.5 / (2.0 * (0.5 + kJ)) + 0.5 * kJ * kJ / (2.0 * 5 * 0.5 * (0.5 + 2.0 * kJ) * (0.5 + kJ));
  CHECK(five.var_x1 == Approx(expected).epsilon(1e-12));
  for (double q : {0.5, 2.0}) {
    const FiniteNpFluctuations big = finite_np_fluctuations(q, kJ, 1000000000);
    const PairCovariance mf = meanfield_covariance_analytic(q, kJ);
    CHECK(2.0 * big.var_x1 == Approx(mf.a1).epsilon(1e-8));
    CHECK(2.0 * big.var_p1 == Approx(mf.a2).epsilon(1e-8));
    CHECK(std::abs(big.cov_x12) < 1e-8);
  }
  CHECK_THROWS_AS(finite_np_fluctuations(1.0, kJ, 5), SingularPointError);
  CHECK_THROWS_AS(finite_np_fluctuations(0.5, kJ, 0), ConfigError);
}

TEST_CASE("Lyapunov solver") {
  const Eigen::MatrixXd s = lyapunov_stationary(-Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3));
  CHECK((s - 0.5 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::MatrixXd a(2, 2);
  a << 0.1, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(lyapunov_stationary(a, Eigen::MatrixXd::Identity(2, 2)), StabilityError);
  CHECK(spectral_abscissa(a) == Approx(0.1));
  // residual on a random stable system
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(5, 5) - 4.0 * Eigen::MatrixXd::Identity(5, 5);
  Eigen::MatrixXd g = Eigen::MatrixXd::Random(5, 5);
  const Eigen::MatrixXd d = g * g.transpose();
  const Eigen::MatrixXd x = lyapunov_stationary(m, d);
  CHECK((m * x + x * m.transpose() + d).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((x - x.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}
