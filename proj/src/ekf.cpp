#include "cdkf/ekf.hpp"

#include <string>

#include "cdkf/decompositions.hpp"
#include "cdkf/errors.hpp"

namespace cdkf {

FilterState ekf_predict(const FilterState& state, const SdeModel& model, const InputSchedule& sched,
                        double Ts, double dt) {
  require_kind(state, StateKind::filtered, "ekf_predict");
  const std::size_t n = model.n_states();
  if (state.x.rows() != n || state.P.rows() != n || !state.P.is_square())
    throw DimensionError("ekf_predict: state does not match model dimension " + std::to_string(n));

  const Matrix& sigma = model.diffusion();
  const Matrix process = symmetrize(sigma * mat_transpose(sigma));
  const EulerGrid grid(state.t, state.t + Ts, dt);

  Matrix x = state.x;
  Matrix P = state.P;
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    const double t = grid.time(j);
    const double h = grid.step(j);
    const Matrix u = sched.inputs_at(t);
    const Matrix d = sched.disturbances_at(t);
    const Matrix f = model.drift(x, u, d);
    const Matrix A = drift_jacobian(model, x, u, d);
    if (!all_finite(f)) throw IntegrationError("ekf_predict: non-finite drift", t);
    if (!all_finite(A)) throw IntegrationError("ekf_predict: non-finite drift Jacobian", t);

    const Matrix AP = A * P;
    Matrix dP = AP + mat_transpose(AP) + process;
    x += f * h;
    P += dP * h;
    P = symmetrize(P);
    if (!all_finite(P)) throw IntegrationError("ekf_predict: non-finite covariance", t + h);
  }

  FilterState out;
  out.x = std::move(x);
  out.P = std::move(P);
  out.k = state.k + 1;
  out.t = state.t + Ts;
  out.kind = StateKind::predicted;
  return out;
}

EkfUpdate ekf_update(const FilterState& state, const Matrix& y, const SdeModel& model,
                     const Matrix& R) {
  require_kind(state, StateKind::predicted, "ekf_update");
  if (y.rows() != model.n_outputs() || !y.is_vector())
    throw DimensionError("ekf_update: measurement is " + shape_string(y));

  const Matrix C = output_jacobian(model, state.x);
  const Matrix Ct = mat_transpose(C);
  const Matrix PCt = state.P * Ct;
  Matrix Re = symmetrize(C * PCt + R);
  const Matrix K = mat_transpose(solve_spd(Re, mat_transpose(PCt)));
  Matrix e = y - model.output(state.x);

  FilterState out = state;
  out.x = state.x + K * e;
  out.P = joseph_update(state.P, K, C, R);
  out.kind = StateKind::filtered;
  return {std::move(out), make_innovation(std::move(e), std::move(Re))};
}

}  // namespace cdkf
