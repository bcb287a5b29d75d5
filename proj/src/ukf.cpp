#include "cdkf/ukf.hpp"

#include <bit>
#include <cstdint>
#include <cmath>
#include <numeric>
#include <string>

#include "cdkf/decompositions.hpp"
#include "cdkf/errors.hpp"

namespace cdkf {

UkfWeights ukf_weights(std::size_t n, const UkfConfig& cfg) {
  if (n == 0) throw ParameterError("ukf_weights: n must be >= 1");
  if (!(cfg.alpha > 0.0)) throw ParameterError("ukf_weights: alpha must be > 0");
  const double nd = static_cast<double>(n);
  UkfWeights w;
  w.c = cfg.alpha * cfg.alpha * (nd + cfg.kappa);
  w.lambda = w.c - nd;
  if (nd + w.lambda == 0.0) throw ParameterError("ukf_weights: n + lambda == 0");

  // With alpha = 0.01 the center weight is about -1e4, and lambda/(n+lambda) rounds to
  // an error near 1e-12 in the weight sum. Instead the tail weight is rounded to
  // 53 - bit_width(2n) significant bits, so 2n*tail is exact and W_0 = 1 - 2n*tail
  // makes the stored weights sum to exactly one (tail moves by < 2^-47 relative).
  const double denom = nd + w.lambda;
  const std::uint64_t m = 2 * n;
  const int keep = 53 - static_cast<int>(std::bit_width(m));
  int e = 0;
  const double f = std::frexp(1.0 / (2.0 * denom), &e);
  const double tail = std::ldexp(std::nearbyint(std::ldexp(f, keep)), e - keep);
  w.Wm.assign(2 * n + 1, tail);
  w.Wc.assign(2 * n + 1, tail);
  w.Wm[0] = 1.0 - static_cast<double>(m) * tail;
  w.Wc[0] = w.Wm[0] + (1.0 - cfg.alpha * cfg.alpha + cfg.beta);
  return w;
}

Matrix ukf_sigma_points(const Matrix& x, const Matrix& P, double c) {
  const std::size_t n = x.rows();
  if (!x.is_vector() || P.rows() != n || !P.is_square())
    throw DimensionError("ukf_sigma_points: x " + shape_string(x) + ", P " + shape_string(P));
  const Matrix L = cholesky_lower(P);
  const double spread = std::sqrt(c);
  Matrix points(n, 2 * n + 1);
  for (std::size_t r = 0; r < n; ++r) {
    points(r, 0) = x[r];
    for (std::size_t i = 0; i < n; ++i) {
      points(r, 1 + i) = x[r] + spread * L(r, i);
      points(r, 1 + n + i) = x[r] - spread * L(r, i);
    }
  }
  return points;
}

Matrix weighted_mean(const Matrix& points, const std::vector<double>& w) {
  if (points.cols() != w.size())
    throw DimensionError("weighted_mean: " + std::to_string(points.cols()) + " points, " +
                         std::to_string(w.size()) + " weights");
  // Accumulated around the first column: sum w_i X_i = (sum w) X_0 + sum w_i (X_i - X_0).
  // The plain sum cancels terms of size |w_0| |x| ~ 1e4 |x| at alpha = 0.01.
  Matrix mean(points.rows(), 1);
  if (w.empty()) return mean;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const double x0 = points(r, 0);
    double s = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) s += w[i] * (points(r, i) - x0);
    mean[r] = total * x0 + s;
  }
  return mean;
}

namespace {

// sum_i w_i (a_i - a_bar)(b_i - b_bar)^T over columns.
Matrix weighted_cross(const Matrix& a, const Matrix& a_bar, const Matrix& b, const Matrix& b_bar,
                      const std::vector<double>& w) {
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const double da = w[i] * (a(r, i) - a_bar[r]);
      for (std::size_t s = 0; s < b.rows(); ++s) out(r, s) += da * (b(s, i) - b_bar[s]);
    }
  }
  return out;
}

}  // namespace

UkfPrediction ukf_predict(const FilterState& state, const SdeModel& model,
                          const InputSchedule& sched, const UkfConfig& cfg) {
  return ukf_predict(state, model, sched, cfg, ukf_weights(model.n_states(), cfg));
}

UkfPrediction ukf_predict(const FilterState& state, const SdeModel& model,
                          const InputSchedule& sched, const UkfConfig& cfg,
                          const UkfWeights& weights) {
  require_kind(state, StateKind::filtered, "ukf_predict");
  const std::size_t n = model.n_states();
  if (state.x.rows() != n || state.P.rows() != n || weights.n_points() != 2 * n + 1)
    throw DimensionError("ukf_predict: state/weights do not match model dimension " +
                         std::to_string(n));

  const Matrix& sigma = model.diffusion();
  const Matrix process = symmetrize(sigma * mat_transpose(sigma));
  const EulerGrid grid(state.t, state.t + cfg.Ts, cfg.euler_dt);

  Matrix points = ukf_sigma_points(state.x, state.P, weights.c);
  Matrix P = state.P;
  Matrix rates(n, points.cols());
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    const double t = grid.time(j);
    const double h = grid.step(j);
    const Matrix u = sched.inputs_at(t);
    const Matrix d = sched.disturbances_at(t);
    for (std::size_t i = 0; i < points.cols(); ++i) rates.set_col(i, model.drift(points.col(i), u, d));
    if (!all_finite(rates)) throw IntegrationError("ukf_predict: non-finite drift", t);

    const Matrix x_bar = weighted_mean(points, weights.Wm);
    const Matrix f_bar = weighted_mean(rates, weights.Wm);
    const Matrix cross = weighted_cross(points, x_bar, rates, f_bar, weights.Wc);
    P += (cross + mat_transpose(cross) + process) * h;
    P = symmetrize(P);
    points += rates * h;
    if (!all_finite(P) || !all_finite(points))
      throw IntegrationError("ukf_predict: non-finite state", t + h);
  }

  UkfPrediction out;
  out.state.x = weighted_mean(points, weights.Wm);
  out.state.P = std::move(P);
  out.state.k = state.k + 1;
  out.state.t = state.t + cfg.Ts;
  out.state.kind = StateKind::predicted;
  out.sigma_points = std::move(points);
  return out;
}

UkfMeasurementStats ukf_measurement_stats(const Matrix& sigma_points, const UkfWeights& weights,
                                          const SdeModel& model, const Matrix& R) {
  if (sigma_points.cols() != weights.n_points() || sigma_points.rows() != model.n_states())
    throw DimensionError("ukf_measurement_stats: points " + shape_string(sigma_points));
  const std::size_t p = model.n_outputs();
  if (R.rows() != p || !R.is_square())
    throw DimensionError("ukf_measurement_stats: R is " + shape_string(R));

  Matrix outputs(p, sigma_points.cols());
  for (std::size_t i = 0; i < sigma_points.cols(); ++i)
    outputs.set_col(i, model.output(sigma_points.col(i)));

  UkfMeasurementStats stats;
  stats.x_hat = weighted_mean(sigma_points, weights.Wm);
  stats.y_hat = weighted_mean(outputs, weights.Wm);
  stats.Re = symmetrize(weighted_cross(outputs, stats.y_hat, outputs, stats.y_hat, weights.Wc) + R);
  stats.Rxy = weighted_cross(sigma_points, stats.x_hat, outputs, stats.y_hat, weights.Wc);
  return stats;
}

UkfUpdate ukf_update(const FilterState& state, const Matrix& y, const UkfMeasurementStats& stats) {
  require_kind(state, StateKind::predicted, "ukf_update");
  if (y.rows() != stats.y_hat.rows() || !y.is_vector())
    throw DimensionError("ukf_update: measurement is " + shape_string(y));
  const Matrix K = mat_transpose(solve_spd(stats.Re, mat_transpose(stats.Rxy)));
  Matrix e = y - stats.y_hat;

  FilterState out = state;
  out.x = state.x + K * e;
  out.P = symmetrize(state.P - K * stats.Re * mat_transpose(K));
  out.kind = StateKind::filtered;
  return {std::move(out), make_innovation(std::move(e), stats.Re)};
}

}  // namespace cdkf
