#include "cdkf/run_filter.hpp"

#include <cmath>
#include <string>

#include "cdkf/ekf.hpp"
#include "cdkf/errors.hpp"

namespace cdkf {

FilterKind parse_filter_kind(std::string_view name) {
  if (name == "kf") return FilterKind::kf;
  if (name == "ekf") return FilterKind::ekf;
  if (name == "ukf") return FilterKind::ukf;
  throw InputError("unknown filter '" + std::string(name) + "' (expected kf, ekf or ukf)");
}

std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::kf: return "kf";
    case FilterKind::ekf: return "ekf";
    case FilterKind::ukf: return "ukf";
  }
  return "?";
}

namespace {

constexpr double kGridSlack = 1e-6;

// Per-filter predict/update behind one interface; holds the UKF sigma points between stages.
class Stepper {
 public:
  Stepper(FilterKind kind, const FilterBundle& b, const InputSchedule& sched)
      : kind_(kind), b_(b), sched_(sched) {
    if (kind_ != FilterKind::kf && !b_.sde) throw InputError("EKF/UKF need an SDE model");
    if (kind_ == FilterKind::ukf) weights_ = ukf_weights(b_.sde->n_states(), b_.cfg);
  }

  FilterState initial() {
    FilterState s;
    s.x = b_.x0;
    s.P = kind_ == FilterKind::kf ? b_.gain.P_pred : b_.P0;
    s.k = 0;
    s.t = b_.t0;
    s.kind = StateKind::predicted;
    if (kind_ == FilterKind::ukf) points_ = ukf_sigma_points(s.x, s.P, weights_.c);
    return s;
  }

  FilterState predict(const FilterState& filtered) {
    switch (kind_) {
      case FilterKind::kf: {
        const auto& m = b_.linear;
        return kf_predict(filtered, m, sched_.inputs_at(filtered.t),
                          sched_.disturbances_at(filtered.t), b_.gain);
      }
      case FilterKind::ekf:
        return ekf_predict(filtered, *b_.sde, sched_, b_.cfg.Ts, b_.cfg.euler_dt);
      case FilterKind::ukf: {
        auto pred = ukf_predict(filtered, *b_.sde, sched_, b_.cfg, weights_);
        points_ = std::move(pred.sigma_points);
        return std::move(pred.state);
      }
    }
    throw std::logic_error("unreachable");
  }

  /// Predicted measurement for the current predicted state; caches UKF statistics.
  Matrix predicted_measurement(const FilterState& predicted) {
    switch (kind_) {
      case FilterKind::kf: {
        Matrix y = b_.linear.C * predicted.x;
        for (double& v : y.data()) v += b_.linear.y_ss;
        return y;
      }
      case FilterKind::ekf:
        return b_.sde->output(predicted.x);
      case FilterKind::ukf:
        stats_ = ukf_measurement_stats(points_, weights_, *b_.sde, b_.R);
        return stats_.y_hat;
    }
    throw std::logic_error("unreachable");
  }

  std::pair<FilterState, Innovation> update(const FilterState& predicted, const Matrix& y) {
    switch (kind_) {
      case FilterKind::kf: {
        auto r = kf_update(predicted, y, b_.gain, b_.linear);
        return {std::move(r.state), std::move(r.innovation)};
      }
      case FilterKind::ekf: {
        auto r = ekf_update(predicted, y, *b_.sde, b_.R);
        return {std::move(r.state), std::move(r.innovation)};
      }
      case FilterKind::ukf: {
        auto r = ukf_update(predicted, y, stats_);
        return {std::move(r.state), std::move(r.innovation)};
      }
    }
    throw std::logic_error("unreachable");
  }

 private:
  FilterKind kind_;
  const FilterBundle& b_;
  const InputSchedule& sched_;
  UkfWeights weights_;
  Matrix points_;
  UkfMeasurementStats stats_;
};

}  // namespace

std::vector<FilterStep> run_filter(FilterKind kind, const FilterBundle& bundle,
                                   std::span<const Measurement> measurements,
                                   const InputSchedule& sched) {
  std::vector<FilterStep> out;
  if (measurements.empty()) return out;
  const double Ts = kind == FilterKind::kf ? bundle.linear.Ts : bundle.cfg.Ts;
  if (!(Ts > 0.0)) throw ParameterError("run_filter: Ts must be > 0");

  Stepper stepper(kind, bundle, sched);
  FilterState predicted = stepper.initial();
  std::size_t next_index = 0;

  for (std::size_t row = 0; row < measurements.size(); ++row) {
    const Measurement& m = measurements[row];
    const double offset = (m.t - bundle.t0) / Ts;
    const double rounded = std::round(offset);
    if (m.t < bundle.t0 - kGridSlack)
      throw InputError("measurement " + std::to_string(row) + " at t = " + std::to_string(m.t) +
                       " precedes t0 = " + std::to_string(bundle.t0));
    if (std::abs(m.t - bundle.t0 - rounded * Ts) > kGridSlack)
      throw InputError("measurement " + std::to_string(row) + " at t = " + std::to_string(m.t) +
                       " is not on the Ts grid");
    const auto index = static_cast<std::size_t>(rounded);
    if (index < next_index)
      throw InputError("measurement " + std::to_string(row) + " is out of order or duplicated");

    for (; next_index <= index; ++next_index) {
      if (next_index > 0) predicted = stepper.predict(out.back().filtered);
      FilterStep step;
      step.predicted = predicted;
      step.y_hat_pred = stepper.predicted_measurement(predicted);
      if (next_index == index && m.y) {
        auto [filtered, innovation] = stepper.update(predicted, *m.y);
        step.filtered = std::move(filtered);
        step.innovation = std::move(innovation);
      } else {
        step.filtered = predicted;
        step.filtered.kind = StateKind::filtered;
        step.missing = true;
      }
      out.push_back(std::move(step));
    }
  }
  return out;
}

}  // namespace cdkf
