#pragma once

// Discrete-time linear Kalman filter on DiscreteLinearModel, with the
// stationary (DARE) gain used for the constant-gain filter.

#include <cstddef>

#include "cdkf/filter_state.hpp"
#include "cdkf/glucose_model.hpp"
#include "cdkf/matrix.hpp"

namespace cdkf {

/// One sweep of the prediction-covariance Riccati recursion:
/// A P A^T + Qx - (A P C^T)(C P C^T + R)^-1 (A P C^T)^T, symmetrized.
Matrix riccati_map(const Matrix& P, const Matrix& A, const Matrix& C, const Matrix& Qx,
                   const Matrix& R);

/// ||riccati_map(P) - P||_F, absolute. Rounding puts a floor near 1e-16 ||P||_F on it.
double dare_residual(const Matrix& P, const Matrix& A, const Matrix& C, const Matrix& Qx,
                     const Matrix& R);

struct DareOptions {
  double tol = 1e-12;
  std::size_t max_iter = 1'000'000;
};

/// Stationary one-step prediction covariance P = lim P_{k|k-1}, by fixed-point iteration
/// of riccati_map from P = Qx until dare_residual < tol.
/// Throws ConvergenceError (carrying the last residual) after max_iter sweeps.
Matrix solve_dare(const Matrix& A, const Matrix& C, const Matrix& Qx, const Matrix& R,
                  const DareOptions& options = {});

struct StationaryGain {
  Matrix P_pred;  // DARE solution
  Matrix Re_inf;  // C P C^T + R
  Matrix K_inf;   // P C^T Re^-1
  Matrix P_filt;  // P - K Re K^T
};

StationaryGain stationary_gain(const Matrix& P, const Matrix& C, const Matrix& R);

/// Stationary-mode prediction: x = A x + B u + E d, P carried as gain.P_pred.
FilterState kf_predict(const FilterState& state, const DiscreteLinearModel& model, const Matrix& u,
                       const Matrix& d, const StationaryGain& gain);

/// Time-varying prediction: same mean recursion, P = A P A^T + Qx.
FilterState kf_predict(const FilterState& state, const DiscreteLinearModel& model, const Matrix& u,
                       const Matrix& d, const Matrix& Qx);

struct KfUpdate {
  FilterState state;
  Innovation innovation;
};

/// Constant-gain update with y in absolute units: e = (y - y_ss) - C x, x += K_inf e,
/// P set to P_filt.
KfUpdate kf_update(const FilterState& state, const Matrix& y, const StationaryGain& gain,
                   const DiscreteLinearModel& model);
KfUpdate kf_update(const FilterState& state, double y, const StationaryGain& gain,
                   const DiscreteLinearModel& model);

/// Time-varying update with the gain from the current P and the Joseph covariance form.
KfUpdate kf_update(const FilterState& state, const Matrix& y, const DiscreteLinearModel& model);

}  // namespace cdkf
