#include "cdkf/sde.hpp"

#include <cmath>
#include <string>

#include "cdkf/errors.hpp"
#include "cdkf/random.hpp"

namespace cdkf {

Matrix drift_jacobian(const SdeModel& model, const Matrix& x, const Matrix& u, const Matrix& d) {
  if (auto jac = model.jacobian_drift(x, u, d)) return *std::move(jac);
  return finite_difference_jacobian([&](const Matrix& probe) { return model.drift(probe, u, d); }, x);
}

Matrix output_jacobian(const SdeModel& model, const Matrix& x) {
  if (auto jac = model.jacobian_output(x)) return *std::move(jac);
  return finite_difference_jacobian([&](const Matrix& probe) { return model.output(probe); }, x);
}

LinearSdeModel::LinearSdeModel(ContinuousLinearRealization sys, Matrix sigma)
    : sys_(std::move(sys)), sigma_(std::move(sigma)) {
  const std::size_t n = sys_.A_c.rows();
  if (!sys_.A_c.is_square() || sys_.B_c.rows() != n || sys_.E_c.rows() != n || sys_.C.cols() != n)
    throw DimensionError("LinearSdeModel: inconsistent realization");
  if (sigma_.rows() != n)
    throw DimensionError("LinearSdeModel: sigma has " + std::to_string(sigma_.rows()) +
                         " rows, expected " + std::to_string(n));
}

Matrix LinearSdeModel::drift(const Matrix& x, const Matrix& u, const Matrix& d) const {
  return sys_.A_c * x + sys_.B_c * u + sys_.E_c * d;
}

Matrix LinearSdeModel::output(const Matrix& x) const {
  Matrix z = sys_.C * x;
  for (double& v : z.data()) v += sys_.y_ss;
  return z;
}

LinearSdeModel wrap_linear_as_sde(const ContinuousLinearRealization& sys, const Matrix& sigma) {
  return LinearSdeModel(sys, sigma);
}

EulerGrid::EulerGrid(double t0, double t1, double dt) : t0_(t0), t1_(t1), dt_(dt) {
  if (!(dt > 0.0)) throw ParameterError("Euler step must be > 0, got " + std::to_string(dt));
  if (!(t1 > t0)) throw ParameterError("integration interval must have t1 > t0");
  const double ratio = (t1 - t0) / dt;
  steps_ = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
  if (steps_ == 0) steps_ = 1;
}

SamplePath euler_maruyama(const SdeModel& model, const Matrix& x0, const InputSchedule& sched,
                          double t0, double t1, double dt, std::uint64_t seed) {
  if (x0.rows() != model.n_states() || !x0.is_vector())
    throw DimensionError("euler_maruyama: x0 is " + shape_string(x0));
  const EulerGrid grid(t0, t1, dt);
  const Matrix& sigma = model.diffusion();
  GaussianSource rng(seed);

  SamplePath path;
  path.times.reserve(grid.steps() + 1);
  path.states.reserve(grid.steps() + 1);
  path.times.push_back(t0);
  path.states.push_back(x0);

  Matrix x = x0;
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    const double t = grid.time(j);
    const double h = grid.step(j);
    const Matrix f = model.drift(x, sched.inputs_at(t), sched.disturbances_at(t));
    if (!all_finite(f)) throw IntegrationError("euler_maruyama: non-finite drift", t);
    const Matrix xi = rng.standard_normal_vector(sigma.cols());
    x += f * h;
    x += sigma * xi * std::sqrt(h);
    path.times.push_back(grid.time(j + 1));
    path.states.push_back(x);
  }
  return path;
}

}  // namespace cdkf
