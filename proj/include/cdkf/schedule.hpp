#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cdkf/matrix.hpp"

namespace cdkf {

struct Breakpoint {
  double time_min = 0.0;
  double value = 0.0;
};

/// Piecewise-constant signal. The value at t is the value of the latest breakpoint
/// with time <= t (1e-9 min slack); before the first breakpoint the signal is 0.
class PiecewiseConstant {
 public:
  static constexpr double kTimeSlack = 1e-9;

  PiecewiseConstant() = default;

  /// Breakpoints must be strictly increasing in time with finite values;
  /// `nonnegative` additionally rejects negative values.
  explicit PiecewiseConstant(std::vector<Breakpoint> breakpoints, bool nonnegative = false);

  double value_at(double t) const;
  std::span<const Breakpoint> breakpoints() const noexcept { return breakpoints_; }

 private:
  std::vector<Breakpoint> breakpoints_;
};

/// Manipulated inputs u(t) (IU/min) and disturbances d(t) (g/min), one signal per channel.
/// Disturbance channels are required to be nonnegative.
class InputSchedule {
 public:
  InputSchedule() = default;
  InputSchedule(std::vector<PiecewiseConstant> inputs, std::vector<PiecewiseConstant> disturbances);

  /// All-zero schedule with the given channel counts.
  static InputSchedule zero(std::size_t n_inputs, std::size_t n_disturbances);

  std::size_t n_inputs() const noexcept { return inputs_.size(); }
  std::size_t n_disturbances() const noexcept { return disturbances_.size(); }

  Matrix inputs_at(double t) const;
  Matrix disturbances_at(double t) const;

  std::span<const PiecewiseConstant> inputs() const noexcept { return inputs_; }
  std::span<const PiecewiseConstant> disturbances() const noexcept { return disturbances_; }

 private:
  std::vector<PiecewiseConstant> inputs_;
  std::vector<PiecewiseConstant> disturbances_;
};

}  // namespace cdkf
