#include "cdkf/linear_kalman.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cdkf/decompositions.hpp"
#include "cdkf/errors.hpp"

namespace cdkf {

Innovation make_innovation(Matrix e, Matrix Re) {
  const Matrix w = solve_spd(Re, e);
  double nis = 0.0;
  for (std::size_t i = 0; i < e.rows(); ++i) nis += e[i] * w[i];
  return {std::move(e), std::move(Re), nis};
}

Matrix joseph_update(const Matrix& P, const Matrix& K, const Matrix& C, const Matrix& R) {
  const Matrix ikc = Matrix::Identity(P.rows()) - K * C;
  return symmetrize(ikc * P * mat_transpose(ikc) + K * R * mat_transpose(K));
}

Matrix riccati_map(const Matrix& P, const Matrix& A, const Matrix& C, const Matrix& Qx,
                   const Matrix& R) {
  const Matrix At = mat_transpose(A);
  const Matrix Ct = mat_transpose(C);
  const Matrix apct = A * P * Ct;
  const Matrix s = C * P * Ct + R;
  // (A P C^T) S^-1 (A P C^T)^T with S^-1 applied by a solve.
  const Matrix correction = apct * solve_spd(s, mat_transpose(apct));
  return symmetrize(A * P * At + Qx - correction);
}

double dare_residual(const Matrix& P, const Matrix& A, const Matrix& C, const Matrix& Qx,
                     const Matrix& R) {
  return frobenius_norm(riccati_map(P, A, C, Qx, R) - P);
}

Matrix solve_dare(const Matrix& A, const Matrix& C, const Matrix& Qx, const Matrix& R,
                  const DareOptions& options) {
  const std::size_t n = A.rows();
  if (!A.is_square() || C.cols() != n || Qx.rows() != n || !Qx.is_square() ||
      R.rows() != C.rows() || !R.is_square())
    throw DimensionError("solve_dare: inconsistent shapes A " + shape_string(A) + ", C " +
                         shape_string(C) + ", Qx " + shape_string(Qx) + ", R " + shape_string(R));

  Matrix P = symmetrize(Qx);
  double residual = 0.0;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    Matrix next = riccati_map(P, A, C, Qx, R);
    residual = frobenius_norm(next - P);
    P = std::move(next);
    if (residual < options.tol) return P;
  }
  throw ConvergenceError("solve_dare: no convergence after " + std::to_string(options.max_iter) +
                             " iterations",
                         residual);
}

StationaryGain stationary_gain(const Matrix& P, const Matrix& C, const Matrix& R) {
  const Matrix Ct = mat_transpose(C);
  StationaryGain g;
  g.P_pred = P;
  g.Re_inf = symmetrize(C * P * Ct + R);
  // K = P C^T Re^-1  <=>  Re K^T = C P^T.
  g.K_inf = mat_transpose(solve_spd(g.Re_inf, mat_transpose(P * Ct)));
  g.P_filt = symmetrize(P - g.K_inf * g.Re_inf * mat_transpose(g.K_inf));
  return g;
}

namespace {

FilterState predict_mean(const FilterState& state, const DiscreteLinearModel& model,
                         const Matrix& u, const Matrix& d) {
  require_kind(state, StateKind::filtered, "kf_predict");
  FilterState out;
  out.x = model.A * state.x + model.B * u + model.E * d;
  out.k = state.k + 1;
  out.t = state.t + model.Ts;
  out.kind = StateKind::predicted;
  return out;
}

Matrix deviation(const Matrix& y, const DiscreteLinearModel& model) {
  if (y.rows() != model.n_outputs() || !y.is_vector())
    throw DimensionError("kf_update: measurement is " + shape_string(y));
  Matrix dev = y;
  for (double& v : dev.data()) v -= model.y_ss;
  return dev;
}

}  // namespace

FilterState kf_predict(const FilterState& state, const DiscreteLinearModel& model, const Matrix& u,
                       const Matrix& d, const StationaryGain& gain) {
  FilterState out = predict_mean(state, model, u, d);
  out.P = gain.P_pred;
  return out;
}

FilterState kf_predict(const FilterState& state, const DiscreteLinearModel& model, const Matrix& u,
                       const Matrix& d, const Matrix& Qx) {
  FilterState out = predict_mean(state, model, u, d);
  out.P = symmetrize(model.A * state.P * mat_transpose(model.A) + Qx);
  return out;
}

KfUpdate kf_update(const FilterState& state, const Matrix& y, const StationaryGain& gain,
                   const DiscreteLinearModel& model) {
  require_kind(state, StateKind::predicted, "kf_update");
  Matrix e = deviation(y, model) - model.C * state.x;
  FilterState out = state;
  out.x = state.x + gain.K_inf * e;
  out.P = gain.P_filt;
  out.kind = StateKind::filtered;
  return {std::move(out), make_innovation(std::move(e), gain.Re_inf)};
}

KfUpdate kf_update(const FilterState& state, double y, const StationaryGain& gain,
                   const DiscreteLinearModel& model) {
  return kf_update(state, Matrix{{y}}, gain, model);
}

KfUpdate kf_update(const FilterState& state, const Matrix& y, const DiscreteLinearModel& model) {
  require_kind(state, StateKind::predicted, "kf_update");
  const Matrix Ct = mat_transpose(model.C);
  Matrix Re = symmetrize(model.C * state.P * Ct + model.R);
  const Matrix K = mat_transpose(solve_spd(Re, mat_transpose(state.P * Ct)));
  Matrix e = deviation(y, model) - model.C * state.x;
  FilterState out = state;
  out.x = state.x + K * e;
  out.P = joseph_update(state.P, K, model.C, model.R);
  out.kind = StateKind::filtered;
  return {std::move(out), make_innovation(std::move(e), std::move(Re))};
}

}  // namespace cdkf
