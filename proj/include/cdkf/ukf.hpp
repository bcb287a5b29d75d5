#pragma once

// Continuous-discrete unscented Kalman filter.
//
// Sigma points are drawn once per sample from the filtered state, propagated
// through the drift with forward Euler, and reused unchanged for the output
// statistics; no second set is drawn from the predicted covariance.

#include <cstddef>
#include <vector>

#include "cdkf/filter_state.hpp"
#include "cdkf/matrix.hpp"
#include "cdkf/schedule.hpp"
#include "cdkf/sde.hpp"

namespace cdkf {

struct UkfConfig {
  double alpha = 0.01;
  double kappa = 0.0;
  double beta = 2.0;
  double euler_dt = 1.0;  // min
  double Ts = 5.0;        // min
};

struct UkfWeights {
  double lambda = 0.0;  // alpha^2 (n + kappa) - n
  double c = 0.0;       // alpha^2 (n + kappa) = n + lambda
  std::vector<double> Wm;
  std::vector<double> Wc;

  std::size_t n_points() const noexcept { return Wm.size(); }
};

/// Throws ParameterError for n == 0, alpha <= 0 or n + lambda == 0.
UkfWeights ukf_weights(std::size_t n, const UkfConfig& cfg);

/// 2n+1 points as the columns of an n x (2n+1) matrix: x, x + sqrt(c) L_i, x - sqrt(c) L_i
/// with L = cholesky_lower(P). Propagates NotPositiveDefiniteError.
Matrix ukf_sigma_points(const Matrix& x, const Matrix& P, double c);

/// sum_i w_i X_i over the columns of `points`.
Matrix weighted_mean(const Matrix& points, const std::vector<double>& w);

struct UkfPrediction {
  FilterState state;
  Matrix sigma_points;  // propagated points X_i(t_k), columns
};

/// Euler over [t, t + cfg.Ts] with step cfg.euler_dt, advancing every sigma point through the
/// drift and P through
///   dP/dt = sum Wc_i (X_i - x)(F_i - F)^T + sum Wc_i (F_i - F)(X_i - x)^T + sigma sigma^T,
/// with x = sum Wm_i X_i, F_i = f(X_i, u, d), F = sum Wm_i F_i.
UkfPrediction ukf_predict(const FilterState& state, const SdeModel& model,
                          const InputSchedule& sched, const UkfConfig& cfg);
UkfPrediction ukf_predict(const FilterState& state, const SdeModel& model,
                          const InputSchedule& sched, const UkfConfig& cfg,
                          const UkfWeights& weights);

struct UkfMeasurementStats {
  Matrix x_hat;  // sum Wm_i X_i
  Matrix y_hat;  // sum Wm_i h(X_i)
  Matrix Re;     // sum Wc_i dy_i dy_i^T + R
  Matrix Rxy;    // sum Wc_i dx_i dy_i^T
};

UkfMeasurementStats ukf_measurement_stats(const Matrix& sigma_points, const UkfWeights& weights,
                                          const SdeModel& model, const Matrix& R);

struct UkfUpdate {
  FilterState state;
  Innovation innovation;
};

/// K = Rxy Re^-1, x += K (y - y_hat), P -= K Re K^T (symmetrized).
UkfUpdate ukf_update(const FilterState& state, const Matrix& y, const UkfMeasurementStats& stats);

}  // namespace cdkf
