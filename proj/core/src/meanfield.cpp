#include "dopo/meanfield.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dopo/errors.hpp"

namespace dopo {

double hyp2f1_terminating(int k, double b_param, double c_param) {
  if (k < 0) throw ConfigError("hyp2f1_terminating: k must be >= 0");
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < k; ++n) {
    const double denom = c_param + n;
    if (denom == 0.0) throw ConfigError("hyp2f1_terminating: pole in (c)_n");
    term *= (n - k) * (b_param + n) / (denom * (n + 1)) * 2.0;
    sum += term;
  }
  return sum;
}

double injection_parameter(double p, double j, double b, double mean_other) {
  if (!(p > 0.0) || !(b > 0.0)) return 0.0;
  return -j * mean_other / std::sqrt(p * b);
}

namespace {

// Signed value stored as sign * exp(log_abs); sign 0 means exactly zero.
struct LogValue {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;
};

// F_k = 2F1(-k, x + e; 2x; 2) from the three-term recurrence
//   (2x + k) F_{k+1} = -2e F_k + k F_{k-1},
// carried with a running scale so it neither overflows nor underflows.
class HypergeometricSequence {
 public:
  HypergeometricSequence(double x, double e) : x_(x), e_(e) {
    push(1.0);
    prev_ = 1.0;
    cur_ = -e / x;
    push(cur_);
  }

  LogValue at(int k) {
    while (static_cast<int>(values_.size()) <= k) advance();
    return values_[k];
  }

 private:
  void push(double scaled) {
    LogValue v;
    if (scaled != 0.0) {
      v.log_abs = std::log(std::abs(scaled)) + scale_;
      v.sign = scaled > 0.0 ? 1 : -1;
    }
    values_.push_back(v);
  }

  void advance() {
    const double k = static_cast<double>(values_.size() - 1);
    const double next = (-2.0 * e_ * cur_ + k * prev_) / (2.0 * x_ + k);
    prev_ = cur_;
    cur_ = next;
    const double mag = std::max(std::abs(prev_), std::abs(cur_));
    if (mag > 1e150 || (mag < 1e-150 && mag > 0.0)) {
      prev_ /= mag;
      cur_ /= mag;
      scale_ += std::log(mag);
    }
    push(cur_);
  }

  double x_, e_;
  double prev_ = 0.0, cur_ = 0.0, scale_ = 0.0;
  std::vector<LogValue> values_;
};

// Running signed log-sum-exp.
class LogSum {
 public:
  void add(double log_abs, int sign) {
    if (sign == 0) return;
    if (log_abs > ref_) {
      acc_ = acc_ * std::exp(ref_ - log_abs) + sign;
      ref_ = log_abs;
    } else {
      acc_ += sign * std::exp(log_abs - ref_);
    }
  }
  double log_abs() const { return std::log(std::abs(acc_)) + ref_; }
  int sign() const { return acc_ > 0.0 ? 1 : (acc_ < 0.0 ? -1 : 0); }
  double relative(double log_term) const {
    if (acc_ == 0.0) return std::numeric_limits<double>::infinity();
    return std::exp(log_term - log_abs());
  }

 private:
  double acc_ = 0.0;
  double ref_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

SeriesResult dopo_moment_series(int m, int n, const DopoSeriesParams& params, const SeriesOptions& options) {
  if (m < 0 || n < 0) throw ConfigError("dopo_moment: orders must be >= 0");
  if (!(params.x > 0.0)) throw ConfigError("dopo_moment: x must be > 0");
  if (params.c == 0.0) return {(m + n == 0) ? 1.0 : 0.0, 0};
  if (m == 0 && n == 0) return {1.0, 0};

  HypergeometricSequence seq(params.x, params.e);
  const double log2 = std::log(2.0);
  const double log_c = std::log(params.c);
  const double peak = 2.0 * params.c * params.c;  // maximum of 2^k c^2k / k!
  constexpr int kMaxTerms = 1000000;
  const double rel_tol = options.rel_tol;

  LogSum num, den;
  int quiet = 0;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double weight = k * log2 + 2.0 * k * log_c - std::lgamma(k + 1.0);
    const LogValue fk = seq.at(k);
    const LogValue fm = seq.at(k + m);
    const LogValue fn = seq.at(k + n);
    const double den_term = weight + 2.0 * fk.log_abs;
    den.add(den_term, fk.sign * fk.sign);
    const double log_term = weight + (m + n) * log_c + fm.log_abs + fn.log_abs;
    const int sign = fm.sign * fn.sign;
    num.add(log_term, sign);
    const bool small = (sign == 0 || num.relative(log_term) < rel_tol) &&
                       (fk.sign == 0 || den.relative(den_term) < rel_tol);
    quiet = small ? quiet + 1 : 0;
    if (k > peak && k >= options.min_terms && quiet >= 3) {
      if (den.sign() == 0) throw NumericalError("dopo_moment: vanishing normalization");
      if (num.sign() == 0) return {0.0, k + 1};
      return {num.sign() * den.sign() * std::exp(num.log_abs() - den.log_abs()), k + 1};
    }
  }
  throw ConvergenceError("dopo_moment: series did not converge within 10^6 terms");
}

double dopo_moment(int m, int n, const DopoSeriesParams& params) {
  return dopo_moment_series(m, n, params).value;
}

MeanFieldState self_consistent_loop(double p, double j, double b, double a0, const LoopOptions& options) {
  if (!(b > 0.0)) throw ConfigError("b must be > 0");
  if (!(p >= 0.0) || !(j >= 0.0)) throw ConfigError("p and j must be non-negative");
  if (options.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(options.mixing > 0.0 && options.mixing <= 1.0)) throw ConfigError("mixing must be in (0, 1]");

  MeanFieldState st;
  st.params.c = std::sqrt(p / b);
  st.params.x = (1.0 + j) / b;
  st.e_amp = a0;
  st.history.push_back(a0);
  for (int it = 0; it < options.max_iter; ++it) {
    st.params.e = injection_parameter(p, j, b, st.e_amp);
    const double mapped = dopo_moment(0, 1, st.params);
    const double next = (1.0 - options.mixing) * st.e_amp + options.mixing * mapped;
    const double step = std::abs(next - st.e_amp);
    st.e_amp = next;
    st.history.push_back(next);
    st.iteration = it + 1;
    if (step < options.tolerance) {
      st.converged = true;
      break;
    }
  }
  st.params.e = injection_parameter(p, j, b, st.e_amp);
  return st;
}

QuadratureVariances meanfield_variances(const MeanFieldState& state) {
  const double mean = dopo_moment(0, 1, state.params);
  const double n2 = dopo_moment(1, 1, state.params);
  const double m2 = dopo_moment(0, 2, state.params);
  return {0.5 + n2 + m2 - 2.0 * mean * mean, 0.5 + n2 - m2};
}

}  // namespace dopo
