#pragma once

#include <vector>

#include "dopo/oracles.hpp"

namespace dopo {

/// Sum_{n=0}^{k} (-k)_n (b)_n / (c)_n 2^n / n!, by term recurrence.
/// Throws ConfigError if a Pochhammer denominator vanishes within the sum.
double hyp2f1_terminating(int k, double b_param, double c_param);

/// Parameters of the exact single-DOPO steady state with real injection:
/// c = sqrt(p / b), x = (1 + j) / b, and the injection parameter e.
struct DopoSeriesParams {
  double c = 0.0;
  double x = 0.0;
  double e = 0.0;
};

/// Injection parameter for a mean amplitude of the other DOPO. The sign is
/// chosen so that a positive neighbour drives this DOPO towards a positive
/// amplitude.
double injection_parameter(double p, double j, double b, double mean_other);

struct SeriesOptions {
  double rel_tol = 1e-16;
  int min_terms = 0;  // sum at least this many terms
};

struct SeriesResult {
  double value = 0.0;
  int terms = 0;
};

/// Normally ordered moment <a^dag^m a^n> of the exact steady state, as a
/// ratio of two series summed in log space. Throws ConvergenceError if the
/// series has not converged after 10^6 terms.
SeriesResult dopo_moment_series(int m, int n, const DopoSeriesParams& params, const SeriesOptions& options = {});
double dopo_moment(int m, int n, const DopoSeriesParams& params);

struct MeanFieldState {
  double e_amp = 0.0;  // current mean amplitude <a>
  int iteration = 0;
  std::vector<double> history;  // size iteration + 1
  DopoSeriesParams params;
  bool converged = false;
};

struct LoopOptions {
  int max_iter = 2000;
  double tolerance = 1e-10;
  /// Weight of the new iterate; 1 is the plain fixed-point map.
  double mixing = 1.0;
};

/// Iterate <a>_{n+1} = <a>(e(<a>_n)) from a0.
MeanFieldState self_consistent_loop(double p, double j, double b, double a0, const LoopOptions& options = {});

/// Quadrature variances of the converged single DOPO (symmetric order).
QuadratureVariances meanfield_variances(const MeanFieldState& state);

}  // namespace dopo
