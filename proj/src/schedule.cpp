#include "cdkf/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdkf/errors.hpp"

namespace cdkf {

PiecewiseConstant::PiecewiseConstant(std::vector<Breakpoint> breakpoints, bool nonnegative)
    : breakpoints_(std::move(breakpoints)) {
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const auto& bp = breakpoints_[i];
    if (!std::isfinite(bp.time_min) || !std::isfinite(bp.value))
      throw InputError("breakpoint " + std::to_string(i) + " is not finite");
    if (nonnegative && bp.value < 0.0)
      throw InputError("breakpoint " + std::to_string(i) + " has negative value " +
                       std::to_string(bp.value));
    if (i > 0 && !(bp.time_min > breakpoints_[i - 1].time_min))
      throw InputError("breakpoint times must be strictly increasing (index " +
                       std::to_string(i) + ")");
  }
}

double PiecewiseConstant::value_at(double t) const {
  // First breakpoint strictly after t, then step back one.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t + kTimeSlack,
                             [](double time, const Breakpoint& bp) { return time < bp.time_min; });
  if (it == breakpoints_.begin()) return 0.0;
  return std::prev(it)->value;
}

InputSchedule::InputSchedule(std::vector<PiecewiseConstant> inputs,
                             std::vector<PiecewiseConstant> disturbances)
    : inputs_(std::move(inputs)), disturbances_(std::move(disturbances)) {
  for (std::size_t c = 0; c < disturbances_.size(); ++c)
    for (const auto& bp : disturbances_[c].breakpoints())
      if (bp.value < 0.0)
        throw InputError("disturbance channel " + std::to_string(c) + " has a negative value");
}

InputSchedule InputSchedule::zero(std::size_t n_inputs, std::size_t n_disturbances) {
  return InputSchedule(std::vector<PiecewiseConstant>(n_inputs),
                       std::vector<PiecewiseConstant>(n_disturbances));
}

Matrix InputSchedule::inputs_at(double t) const {
  Matrix u(inputs_.size(), 1);
  for (std::size_t i = 0; i < inputs_.size(); ++i) u[i] = inputs_[i].value_at(t);
  return u;
}

Matrix InputSchedule::disturbances_at(double t) const {
  Matrix d(disturbances_.size(), 1);
  for (std::size_t i = 0; i < disturbances_.size(); ++i) d[i] = disturbances_[i].value_at(t);
  return d;
}

}  // namespace cdkf
