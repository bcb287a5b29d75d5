#pragma once

// Sample-by-sample filtering loop shared by the KF, EKF and UKF.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cdkf/filter_state.hpp"
#include "cdkf/glucose_model.hpp"
#include "cdkf/linear_kalman.hpp"
#include "cdkf/sde.hpp"
#include "cdkf/ukf.hpp"

namespace cdkf {

enum class FilterKind { kf, ekf, ukf };

FilterKind parse_filter_kind(std::string_view name);
std::string_view to_string(FilterKind kind);

/// Everything the three filters need to run on one plant.
struct FilterBundle {
  DiscreteLinearModel linear;           // KF plant (deviation variables)
  StationaryGain gain;                  // KF constant gain
  std::shared_ptr<const SdeModel> sde;  // EKF/UKF plant
  Matrix R;                             // EKF/UKF measurement noise
  UkfConfig cfg;                        // Ts, euler_dt (EKF too) and UKF weights
  Matrix x0;                            // initial mean, in the state space of the filter
  Matrix P0;                            // initial covariance (EKF/UKF)
  double t0 = 0.0;
};

/// One sample on the Ts grid. An empty `y` marks a dropout.
struct Measurement {
  double t = 0.0;
  std::optional<Matrix> y;  // absolute units
};

struct FilterStep {
  FilterState predicted;
  FilterState filtered;
  Matrix y_hat_pred;                     // predicted measurement, absolute units
  std::optional<Innovation> innovation;  // empty when `missing`
  bool missing = false;
};

/// Runs predict/update over the measurements. The initial state (x0, P0) is the
/// prediction for t0, so a sample at t0 is updated without a preceding prediction.
/// Samples must sit on the t0 + k*Ts grid (1e-6 min slack) in increasing order; grid
/// points without a sample, and samples with no value, become predict-only steps.
/// Throws InputError for samples before t0, off the grid, or out of order.
std::vector<FilterStep> run_filter(FilterKind kind, const FilterBundle& bundle,
                                   std::span<const Measurement> measurements,
                                   const InputSchedule& sched);

}  // namespace cdkf
