#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cdkf/decompositions.hpp"
#include "cdkf/ekf.hpp"
#include "cdkf/errors.hpp"
#include "cdkf/ukf.hpp"
#include "models.hpp"
#include "support.hpp"

using namespace cdkf;
using cdkf::test::rel_diff;

namespace {

const TransferParams kParams{-1500.0, 47.0, 150.0, 40.0};

FilterState make_state(Matrix x, Matrix P, StateKind kind) {
  FilterState s;
  s.x = std::move(x);
  s.P = std::move(P);
  s.kind = kind;
  return s;
}

// sum_i Wc_i (X_i - x)(X_i - x)^T, straight from the definition.
Matrix spread(const Matrix& points, const Matrix& x, const std::vector<double>& Wc) {
  Matrix out(x.rows(), x.rows());
  for (std::size_t i = 0; i < Wc.size(); ++i) {
    const Matrix dx = points.col(i) - x;
    out += mat_scale(dx * mat_transpose(dx), Wc[i]);
  }
  return out;
}

// dx = a x dt + s dW, scalar.
class ScalarLinearModel final : public SdeModel {
 public:
  ScalarLinearModel(double a, double s) : a_(a), sigma_{{s}} {}
  std::size_t n_states() const override { return 1; }
  std::size_t n_inputs() const override { return 0; }
  std::size_t n_disturbances() const override { return 0; }
  std::size_t n_outputs() const override { return 1; }
  Matrix drift(const Matrix& x, const Matrix&, const Matrix&) const override {
    return Matrix{{a_ * x[0]}};
  }
  const Matrix& diffusion() const override { return sigma_; }
  Matrix output(const Matrix& x) const override { return x; }

 private:
  double a_;
  Matrix sigma_;
};

}  // namespace

TEST(UkfWeights, ScalarDefaultParameters) {
  const auto w = ukf_weights(1, UkfConfig{});
  EXPECT_NEAR(w.lambda, -0.9999, 1e-13);
  EXPECT_NEAR(w.c, 1e-4, 1e-17);
  ASSERT_EQ(w.n_points(), 3u);
  EXPECT_NEAR(w.Wm[0], -9999.0, 1e-8);
  EXPECT_NEAR(w.Wm[1], 5000.0, 1e-8);
  EXPECT_NEAR(w.Wm[2], 5000.0, 1e-8);
  EXPECT_NEAR(w.Wc[0], -9996.0001, 1e-8);
  EXPECT_EQ(w.Wc[1], w.Wm[1]);
}

TEST(UkfWeights, SumIdentities) {
  for (double alpha : {0.01, 0.5, 1.0})
    for (std::size_t n = 1; n <= 10; ++n) {
      UkfConfig cfg;
      cfg.alpha = alpha;
      const auto w = ukf_weights(n, cfg);
      // summed in long double: in double, partial sums near |W_0| ~ 1e4 round by ~1e-12 each
      const auto sm = static_cast<double>(std::accumulate(w.Wm.begin(), w.Wm.end(), 0.0L));
      const auto sc = static_cast<double>(std::accumulate(w.Wc.begin(), w.Wc.end(), 0.0L));
      EXPECT_NEAR(sm, 1.0, 1e-12) << "n=" << n << " alpha=" << alpha;
      EXPECT_NEAR(sc, 1.0 + (1.0 - alpha * alpha + cfg.beta), 1e-12) << "n=" << n;
      EXPECT_NEAR(w.c, w.lambda + static_cast<double>(n), 1e-15);
    }
}

TEST(UkfWeights, InvalidParameters) {
  UkfConfig cfg;
  EXPECT_THROW(ukf_weights(0, cfg), ParameterError);
  cfg.alpha = 0.0;
  EXPECT_THROW(ukf_weights(2, cfg), ParameterError);
  cfg.alpha = -0.1;
  EXPECT_THROW(ukf_weights(2, cfg), ParameterError);
  cfg.alpha = 0.01;
  cfg.kappa = -3.0;
  EXPECT_THROW(ukf_weights(3, cfg), ParameterError);
}

TEST(UkfSigmaPoints, UnitLayout) {
  const Matrix pts = ukf_sigma_points(Matrix(2, 1), Matrix::Identity(2), 1.0);
  EXPECT_EQ(pts, (Matrix{{0, 1, 0, -1, 0}, {0, 0, 1, 0, -1}}));
}

TEST(UkfSigmaPoints, ReconstructMeanAndCovariance) {
  GaussianSource rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const Matrix x = test::random_matrix(rng, n, 1);
    const Matrix P = test::random_spd(rng, n);
    const auto w = ukf_weights(n, UkfConfig{});
    const Matrix pts = ukf_sigma_points(x, P, w.c);
    EXPECT_LE(max_abs(weighted_mean(pts, w.Wm) - x), 1e-12 * (1.0 + max_abs(x)));
    EXPECT_LE(rel_diff(spread(pts, x, w.Wc), P), 1e-10);
  }
}

TEST(UkfSigmaPoints, Errors) {
  EXPECT_THROW(ukf_sigma_points(Matrix(2, 1), Matrix{{1, 2}, {2, 1}}, 1.0), NotPositiveDefiniteError);
  EXPECT_THROW(ukf_sigma_points(Matrix(3, 1), Matrix::Identity(2), 1.0), DimensionError);
  EXPECT_THROW(weighted_mean(Matrix(2, 3), {1.0, 0.0}), DimensionError);
}

TEST(UkfPredict, NoDynamicsNoNoise) {
  const test::ZeroDriftModel model(3, Matrix(3, 1));
  GaussianSource rng(52);
  const auto s = make_state(Matrix::Column({1, 2, 3}), test::random_spd(rng, 3), StateKind::filtered);
  const auto w = ukf_weights(3, UkfConfig{});
  const auto p = ukf_predict(s, model, InputSchedule::zero(0, 0), UkfConfig{});
  EXPECT_LE(max_abs(p.state.x - s.x), 1e-12);
  EXPECT_EQ(p.state.P, s.P);
  EXPECT_EQ(p.sigma_points, ukf_sigma_points(s.x, s.P, w.c));
  EXPECT_EQ(p.state.kind, StateKind::predicted);
  EXPECT_DOUBLE_EQ(p.state.t, 5.0);
}

TEST(UkfPredict, PureDiffusionAddsTsTimesIdentity) {
  const test::ZeroDriftModel model(3, Matrix::Identity(3));
  const Matrix P = Matrix::Diagonal({1.0, 2.0, 3.0});
  const auto p = ukf_predict(make_state(Matrix(3, 1), P, StateKind::filtered), model,
                             InputSchedule::zero(0, 0), UkfConfig{});
  EXPECT_EQ(p.state.P, P + mat_scale(Matrix::Identity(3), 5.0));
}

TEST(UkfPredict, LinearModelMatchesEkf) {
  // Both are Euler discretizations of the same linear moment ODEs; the covariances differ
  // by an O(dt) term with ||A|| ~ 1 here, so the 1e-6 match needs a very fine step.
  const auto sys = build_glucose_model(kParams);
  const auto model = wrap_linear_as_sde(sys, Matrix(4, 1));
  GaussianSource rng(53);
  const auto s = make_state(Matrix::Column({1e-4, 2e-3, 0.05, 1.5}), test::random_spd(rng, 4, 0.1),
                            StateKind::filtered);
  const InputSchedule sched({PiecewiseConstant({{0.0, 0.002}})}, {PiecewiseConstant({{0.0, 0.3}}, true)});
  auto gap = [&](double steps) {
    UkfConfig cfg;
    cfg.euler_dt = cfg.Ts / steps;
    const auto u = ukf_predict(s, model, sched, cfg);
    const auto e = ekf_predict(s, model, sched, cfg.Ts, cfg.euler_dt);
    EXPECT_LE(rel_diff(u.state.x, e.x), 1e-9);
    return rel_diff(u.state.P, e.P);
  };
  const double coarse = gap(500.0), fine = gap(5000.0);
  EXPECT_NEAR(coarse / fine, 10.0, 0.1);
  EXPECT_LE(gap(500000.0), 1e-6);
}

TEST(UkfPredict, ScalarCovarianceOdeClosedForm) {
  // Each point obeys X <- (1 + a h) X, so the weighted spread after j steps is
  // (1 + a h)^{2j} P0 and dP/dt = 2 a spread + s^2.
  const double a = -0.3, s = 0.7, P0 = 2.0;
  const ScalarLinearModel model(a, s);
  UkfConfig cfg;
  cfg.Ts = 2.0;
  cfg.euler_dt = 1.0;
  const auto p = ukf_predict(make_state(Matrix{{0.5}}, Matrix{{P0}}, StateKind::filtered), model,
                             InputSchedule::zero(0, 0), cfg);
  const double g = 1.0 + a * cfg.euler_dt;
  double expected = P0;
  for (int j = 0; j < 2; ++j) expected += cfg.euler_dt * (2.0 * a * std::pow(g, 2 * j) * P0 + s * s);
  EXPECT_NEAR(p.state.P(0, 0), expected, 1e-9 * expected);
  EXPECT_NEAR(p.state.x(0, 0), 0.5 * g * g, 1e-12);
}

TEST(UkfPredict, Errors) {
  const test::BlowupModel blowup;
  auto s = make_state(Matrix{{0.0}}, Matrix{{1e-6}}, StateKind::filtered);
  UkfConfig cfg;
  cfg.euler_dt = 0.5;
  EXPECT_THROW(ukf_predict(s, blowup, InputSchedule::zero(0, 0), cfg), IntegrationError);
  s.kind = StateKind::predicted;
  EXPECT_THROW(ukf_predict(s, blowup, InputSchedule::zero(0, 0), cfg), StateKindError);
}

TEST(UkfMeasurementStats, ConstantSensor) {
  const test::ConstantOutputModel model(3);
  GaussianSource rng(54);
  const auto w = ukf_weights(3, UkfConfig{});
  const Matrix pts = ukf_sigma_points(test::random_matrix(rng, 3, 1), test::random_spd(rng, 3), w.c);
  const Matrix R{{2.5}};
  const auto st = ukf_measurement_stats(pts, w, model, R);
  EXPECT_NEAR(st.y_hat(0, 0), 7.0, 1e-10);
  EXPECT_LE(max_abs(st.Re - R), 1e-10);
  EXPECT_LE(max_abs(st.Rxy), 1e-10);
}

TEST(UkfMeasurementStats, LinearSensorIdentities) {
  const auto sys = build_glucose_model(kParams);
  const auto model = wrap_linear_as_sde(sys, Matrix::Identity(4));
  const auto w = ukf_weights(4, UkfConfig{});
  GaussianSource rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = test::random_matrix(rng, 4, 1);
    const Matrix P = test::random_spd(rng, 4);
    const Matrix R{{4.0}};
    const auto st = ukf_measurement_stats(ukf_sigma_points(x, P, w.c), w, model, R);
    EXPECT_LE(rel_diff(st.Re, sys.C * P * mat_transpose(sys.C) + R), 1e-10);
    EXPECT_LE(rel_diff(st.Rxy, P * mat_transpose(sys.C)), 1e-10);
    EXPECT_NEAR(st.y_hat(0, 0), (sys.C * x)(0, 0) + 100.0, 1e-9);
  }
}

TEST(UkfMeasurementStats, ShapeErrors) {
  const test::ConstantOutputModel model(2);
  const auto w = ukf_weights(2, UkfConfig{});
  EXPECT_THROW(ukf_measurement_stats(Matrix(2, 3), w, model, Matrix{{1.0}}), DimensionError);
  EXPECT_THROW(ukf_measurement_stats(Matrix(2, 5), w, model, Matrix::Identity(2)), DimensionError);
}

TEST(UkfUpdate, ZeroInnovationStillShrinksCovariance) {
  const auto sys = build_glucose_model(kParams);
  const auto model = wrap_linear_as_sde(sys, Matrix::Identity(4));
  const auto w = ukf_weights(4, UkfConfig{});
  GaussianSource rng(56);
  const Matrix x = test::random_matrix(rng, 4, 1);
  const Matrix P = test::random_spd(rng, 4);
  const auto st = ukf_measurement_stats(ukf_sigma_points(x, P, w.c), w, model, Matrix{{4.0}});
  const auto s = make_state(x, P, StateKind::predicted);
  const auto r = ukf_update(s, st.y_hat, st);
  EXPECT_EQ(r.state.x, x);
  const Matrix K = st.Rxy * Matrix{{1.0 / st.Re(0, 0)}};
  EXPECT_LE(rel_diff(r.state.P, P - K * st.Re * mat_transpose(K)), 1e-12);
  EXPECT_EQ(r.innovation.nis, 0.0);
  EXPECT_EQ(r.state.kind, StateKind::filtered);
}

TEST(UkfUpdate, NoCrossCovarianceMeansNoCorrection) {
  const test::ConstantOutputModel model(2);
  const auto w = ukf_weights(2, UkfConfig{});
  const Matrix x = Matrix::Column({1.0, -1.0});
  const auto st = ukf_measurement_stats(ukf_sigma_points(x, Matrix::Identity(2), w.c), w, model,
                                        Matrix{{1.0}});
  const auto r = ukf_update(make_state(x, Matrix::Identity(2), StateKind::predicted), Matrix{{50.0}}, st);
  EXPECT_LE(max_abs(r.state.x - x), 1e-9);
  EXPECT_LE(max_abs(r.state.P - Matrix::Identity(2)), 1e-9);
}

TEST(UkfUpdate, Errors) {
  const test::ConstantOutputModel model(2);
  const auto w = ukf_weights(2, UkfConfig{});
  auto st = ukf_measurement_stats(ukf_sigma_points(Matrix(2, 1), Matrix::Identity(2), w.c), w, model,
                                  Matrix{{1.0}});
  const auto s = make_state(Matrix(2, 1), Matrix::Identity(2), StateKind::predicted);
  EXPECT_THROW(ukf_update(s, Matrix::Column({1.0, 2.0}), st), DimensionError);
  auto f = s;
  f.kind = StateKind::filtered;
  EXPECT_THROW(ukf_update(f, Matrix{{1.0}}, st), StateKindError);
  st.Re = Matrix{{-1.0}};
  EXPECT_THROW(ukf_update(s, Matrix{{1.0}}, st), NotPositiveDefiniteError);
}
