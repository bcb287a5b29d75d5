#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cdkf {

/// Operand shapes do not conform for the requested operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model or algorithm parameter is outside its valid range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is not symmetric within the factorization tolerance.
class SymmetryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cholesky pivot stayed non-positive after the jitter policy was applied.
class NotPositiveDefiniteError : public std::runtime_error {
 public:
  NotPositiveDefiniteError(std::size_t pivot_index, double pivot_value)
      : std::runtime_error(describe(pivot_index, pivot_value)),
        pivot_index_(pivot_index),
        pivot_value_(pivot_value) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }
  double pivot_value() const noexcept { return pivot_value_; }

 private:
  static std::string describe(std::size_t index, double value) {
    std::ostringstream os;
    os << "matrix is not positive definite: pivot " << index << " = " << value;
    return os.str();
  }

  std::size_t pivot_index_;
  double pivot_value_;
};

/// A value that must be finite turned out NaN or infinite.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time integration produced a non-finite value.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time_min)
      : std::runtime_error(what + " at t = " + std::to_string(time_min) + " min"),
        time_(time_min) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what + " (last residual " + std::to_string(last_residual) + ")"),
        residual_(last_residual) {}

  double last_residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Malformed measurement or event input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cdkf
