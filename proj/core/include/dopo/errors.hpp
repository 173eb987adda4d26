#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dopo {

/// Invalid parameters, shape mismatches, unsupported representation/topology
/// combinations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed form evaluated at a point where it diverges (threshold, lossless
/// mode, zero denominator).
class SingularPointError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Covariance violates the uncertainty relation beyond tolerance.
class InvalidCovarianceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Drift matrix has an eigenvalue with non-negative real part.
class StabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Series or iteration failed to converge.
class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A trajectory crossed the divergence guard.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::uint64_t step)
      : NumericalError(what), step_(step) {}
  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

}  // namespace dopo
