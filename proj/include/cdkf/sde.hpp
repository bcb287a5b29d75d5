#pragma once

// Stochastic differential equation plant with additive constant diffusion:
//   dx = f(x, u, d; p) dt + sigma dw,  z = h(x; p),  y_k = z(t_k) + v_k.
//
// Parameters p are owned by the concrete model. Third-party nonlinear models
// (for example a virtual-patient model) plug in by deriving from SdeModel.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "cdkf/glucose_model.hpp"
#include "cdkf/matrix.hpp"
#include "cdkf/schedule.hpp"

namespace cdkf {

class SdeModel {
 public:
  virtual ~SdeModel() = default;

  virtual std::size_t n_states() const = 0;
  virtual std::size_t n_inputs() const = 0;
  virtual std::size_t n_disturbances() const = 0;
  virtual std::size_t n_outputs() const = 0;

  virtual Matrix drift(const Matrix& x, const Matrix& u, const Matrix& d) const = 0;
  /// sigma, n_states x (noise dimension). State independent.
  virtual const Matrix& diffusion() const = 0;
  virtual Matrix output(const Matrix& x) const = 0;

  /// Analytic df/dx if the model has one.
  virtual std::optional<Matrix> jacobian_drift(const Matrix& /*x*/, const Matrix& /*u*/,
                                               const Matrix& /*d*/) const {
    return std::nullopt;
  }
  /// Analytic dh/dx if the model has one.
  virtual std::optional<Matrix> jacobian_output(const Matrix& /*x*/) const { return std::nullopt; }
};

/// Central-difference Jacobian of `fn` at x, step sqrt(eps) * max(1, |x_i|).
template <typename Fn>
Matrix finite_difference_jacobian(Fn&& fn, const Matrix& x) {
  const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  Matrix probe = x;
  Matrix jac;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double h = root_eps * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const Matrix plus = fn(probe);
    probe[i] = x[i] - h;
    const Matrix minus = fn(probe);
    probe[i] = x[i];
    if (i == 0) jac = Matrix(plus.rows(), x.rows());
    for (std::size_t r = 0; r < plus.rows(); ++r) jac(r, i) = (plus[r] - minus[r]) / (2.0 * h);
  }
  return jac;
}

/// Analytic drift Jacobian when available, central differences otherwise.
Matrix drift_jacobian(const SdeModel& model, const Matrix& x, const Matrix& u, const Matrix& d);
/// Analytic output Jacobian when available, central differences otherwise.
Matrix output_jacobian(const SdeModel& model, const Matrix& x);

/// The continuous linear glucose model seen as an SDE:
/// f = A_c x + B_c u + E_c d, h = C x + y_ss.
class LinearSdeModel final : public SdeModel {
 public:
  LinearSdeModel(ContinuousLinearRealization sys, Matrix sigma);

  std::size_t n_states() const override { return sys_.A_c.rows(); }
  std::size_t n_inputs() const override { return sys_.B_c.cols(); }
  std::size_t n_disturbances() const override { return sys_.E_c.cols(); }
  std::size_t n_outputs() const override { return sys_.C.rows(); }

  Matrix drift(const Matrix& x, const Matrix& u, const Matrix& d) const override;
  const Matrix& diffusion() const override { return sigma_; }
  Matrix output(const Matrix& x) const override;
  std::optional<Matrix> jacobian_drift(const Matrix&, const Matrix&, const Matrix&) const override {
    return sys_.A_c;
  }
  std::optional<Matrix> jacobian_output(const Matrix&) const override { return sys_.C; }

  const ContinuousLinearRealization& realization() const noexcept { return sys_; }

 private:
  ContinuousLinearRealization sys_;
  Matrix sigma_;
};

LinearSdeModel wrap_linear_as_sde(const ContinuousLinearRealization& sys, const Matrix& sigma);

/// Forwards to another model but hides its analytic Jacobians, so filters fall back to
/// finite differences. Holds a reference; `inner` must outlive the adapter.
class NumericJacobianAdapter final : public SdeModel {
 public:
  explicit NumericJacobianAdapter(const SdeModel& inner) : inner_(inner) {}

  std::size_t n_states() const override { return inner_.n_states(); }
  std::size_t n_inputs() const override { return inner_.n_inputs(); }
  std::size_t n_disturbances() const override { return inner_.n_disturbances(); }
  std::size_t n_outputs() const override { return inner_.n_outputs(); }
  Matrix drift(const Matrix& x, const Matrix& u, const Matrix& d) const override {
    return inner_.drift(x, u, d);
  }
  const Matrix& diffusion() const override { return inner_.diffusion(); }
  Matrix output(const Matrix& x) const override { return inner_.output(x); }

 private:
  const SdeModel& inner_;
};

/// Forward-Euler substeps covering [t0, t1]. If dt does not divide the span
/// (1e-9 relative slack) the last substep is truncated so the grid ends on t1.
class EulerGrid {
 public:
  EulerGrid(double t0, double t1, double dt);

  std::size_t steps() const noexcept { return steps_; }
  double time(std::size_t j) const noexcept {
    return j >= steps_ ? t1_ : t0_ + static_cast<double>(j) * dt_;
  }
  double step(std::size_t j) const noexcept { return time(j + 1) - time(j); }

 private:
  double t0_, t1_, dt_;
  std::size_t steps_;
};

struct SamplePath {
  std::vector<double> times;
  std::vector<Matrix> states;
};

/// x_{j+1} = x_j + f(x_j, u, d) h + sigma sqrt(h) xi_j, xi_j ~ N(0, I), inputs held at t_j.
/// Deterministic given the seed (see GaussianSource).
SamplePath euler_maruyama(const SdeModel& model, const Matrix& x0, const InputSchedule& sched,
                          double t0, double t1, double dt, std::uint64_t seed);

}  // namespace cdkf
