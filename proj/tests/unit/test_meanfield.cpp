#include <doctest.h>

#include <cmath>

#include "dopo/errors.hpp"
#include "dopo/meanfield.hpp"

using namespace dopo;
using doctest::Approx;

namespace {
constexpr double kJ = 7.0 / 3.0;
constexpr double kB = 0.019;
}  // namespace

TEST_CASE("terminating hypergeometric sums") {
  CHECK(hyp2f1_terminating(0, 3.7, 1.2) == 1.0);
  for (double b : {0.5, 2.0, -1.5}) {
    for (double c : {1.0, 3.5}) CHECK(hyp2f1_terminating(1, b, c) == Approx(1.0 - 2.0 * b / c));
  }
  CHECK(hyp2f1_terminating(2, 1.0, 4.0) == Approx(0.4).epsilon(1e-15));
  CHECK_THROWS_AS(hyp2f1_terminating(3, 1.0, -1.0), ConfigError);
  CHECK_THROWS_AS(hyp2f1_terminating(-1, 1.0, 1.0), ConfigError);
  // a pole beyond the last term is not reached
  CHECK_NOTHROW(hyp2f1_terminating(1, 1.0, -1.0));
}

TEST_CASE("moment series trivial cases") {
  const DopoSeriesParams params{std::sqrt(2.0 / kB), (1.0 + kJ) / kB, 0.0};
  CHECK(dopo_moment(0, 0, params) == 1.0);
  CHECK(std::abs(dopo_moment(0, 1, params)) < 1e-12);
  const DopoSeriesParams off{0.0, 10.0, 0.3};
  CHECK(dopo_moment(0, 0, off) == 1.0);
  CHECK(dopo_moment(1, 1, off) == 0.0);
  CHECK_THROWS_AS(dopo_moment(-1, 0, params), ConfigError);
  CHECK_THROWS_AS(dopo_moment(0, 1, DopoSeriesParams{1.0, 0.0, 0.0}), ConfigError);
}

TEST_CASE("property: series truncation is converged") {
  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    for (double e : {0.0, 0.3, 2.0}) {
      const DopoSeriesParams params{std::sqrt(p / kB), (1.0 + kJ) / kB, e};
      for (auto [m, n] : {std::pair{0, 1}, std::pair{1, 1}, std::pair{0, 2}}) {
        const SeriesResult base = dopo_moment_series(m, n, params);
        const SeriesResult longer = dopo_moment_series(m, n, params, SeriesOptions{1e-16, 2 * base.terms});
        CHECK(longer.terms >= 2 * base.terms);
        CHECK(std::abs(longer.value - base.value) <= 1e-12 * std::max(1.0, std::abs(base.value)));
      }
    }
  }
}

TEST_CASE("moments are physical") {
  for (double p : {0.5, 2.0}) {
    const DopoSeriesParams params{std::sqrt(p / kB), (1.0 + kJ) / kB, 0.5};
    const double mean = dopo_moment(0, 1, params);
    const double n = dopo_moment(1, 1, params);
    CHECK(n >= 0.0);
    CHECK(n >= mean * mean - 1e-9);
  }
}

TEST_CASE("self-consistent loop") {
  SUBCASE("below threshold decays to zero") {
    const MeanFieldState st = self_consistent_loop(0.5, kJ, kB, 1.0);
    CHECK(st.converged);
    CHECK(std::abs(st.e_amp) < 1e-6);
  }
  SUBCASE("above threshold reaches the classical amplitude") {
    for (double p : {1.5, 2.0, 3.0}) {
      const MeanFieldState st = self_consistent_loop(p, kJ, kB, 1.0);
      CHECK(st.converged);
      CHECK(st.e_amp == Approx(std::sqrt((p - 1.0) / kB)).epsilon(0.01));
    }
    CHECK(self_consistent_loop(2.0, kJ, kB, 1.0).e_amp == Approx(7.255).epsilon(0.01));
  }
  SUBCASE("zero start is a fixed point") {
    for (double p : {0.5, 2.0}) {
      const MeanFieldState st = self_consistent_loop(p, kJ, kB, 0.0);
      CHECK(st.e_amp == 0.0);
      CHECK(st.iteration == 1);
    }
  }
  SUBCASE("no coupling means no mean") {
    for (double a0 : {1.0, -3.0, 10.0}) CHECK(self_consistent_loop(0.7, 0.0, kB, a0).e_amp == 0.0);
  }
  SUBCASE("history") {
    const MeanFieldState st = self_consistent_loop(2.0, kJ, kB, 1.0, LoopOptions{5, 1e-10, 1.0});
    CHECK(st.iteration == 5);
    CHECK(st.history.size() == 6);
    CHECK(st.history.front() == 1.0);
    CHECK(st.history.back() == st.e_amp);
    CHECK_FALSE(st.converged);
  }
  SUBCASE("damping reaches the same fixed point") {
    const MeanFieldState plain = self_consistent_loop(2.0, kJ, kB, 1.0);
    const MeanFieldState damped = self_consistent_loop(2.0, kJ, kB, 1.0, LoopOptions{4000, 1e-10, 0.5});
    CHECK(damped.e_amp == Approx(plain.e_amp).epsilon(1e-8));
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(self_consistent_loop(1.0, kJ, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(self_consistent_loop(-1.0, kJ, kB, 1.0), ConfigError);
    CHECK_THROWS_AS(self_consistent_loop(1.0, kJ, kB, 1.0, LoopOptions{0, 1e-10, 1.0}), ConfigError);
    CHECK_THROWS_AS(self_consistent_loop(1.0, kJ, kB, 1.0, LoopOptions{10, 1e-10, 0.0}), ConfigError);
  }
}

TEST_CASE("mean-field variances") {
  const MeanFieldState below = self_consistent_loop(0.0, kJ, kB, 0.0);
  const QuadratureVariances vac = meanfield_variances(below);
  CHECK(vac.var_x == Approx(0.5));
  CHECK(vac.var_p == Approx(0.5));
  const MeanFieldState st = self_consistent_loop(0.5, kJ, kB, 1.0);
  const QuadratureVariances v = meanfield_variances(st);
  CHECK(v.var_p < 0.5);
  CHECK(v.var_x > 0.5);
  CHECK(v.var_x * v.var_p >= 0.25 - 1e-9);
}

TEST_CASE("injection sign") {
  CHECK(injection_parameter(2.0, kJ, kB, 1.0) < 0.0);
  CHECK(injection_parameter(0.0, kJ, kB, 1.0) == 0.0);
  CHECK(injection_parameter(2.0, kJ, kB, 0.0) == 0.0);
}
