#include "cdkf/glucose_model.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "cdkf/decompositions.hpp"
#include "cdkf/errors.hpp"
#include "cdkf/random.hpp"

namespace cdkf {

void TransferParams::validate() const {
  if (!(tau_u > 0.0)) throw ParameterError("tau_u must be > 0, got " + std::to_string(tau_u));
  if (!(tau_d > 0.0)) throw ParameterError("tau_d must be > 0, got " + std::to_string(tau_d));
  if (K_u >= 0.0) std::cerr << "warning: K_u >= 0 means insulin raises glucose\n";
}

SecondOrderRealization realize_second_order(double gain, double tau) {
  if (!(tau > 0.0)) throw ParameterError("time constant must be > 0, got " + std::to_string(tau));
  const double inv_tau = 1.0 / tau;
  return {
      Matrix{{-2.0 * inv_tau, -inv_tau * inv_tau}, {1.0, 0.0}},
      Matrix{{1.0}, {0.0}},
      Matrix{{0.0, gain * inv_tau * inv_tau}},
  };
}

ContinuousLinearRealization build_glucose_model(const TransferParams& params, double y_ss) {
  params.validate();
  const auto insulin = realize_second_order(params.K_u, params.tau_u);
  const auto cho = realize_second_order(params.K_d, params.tau_d);

  ContinuousLinearRealization sys;
  sys.A_c = block_diagonal(insulin.A, cho.A);
  sys.B_c = Matrix(4, 1);
  sys.B_c.set_block(0, 0, insulin.B);
  sys.E_c = Matrix(4, 1);
  sys.E_c.set_block(2, 0, cho.B);
  sys.C = Matrix(1, 4);
  sys.C.set_block(0, 0, insulin.C);
  sys.C.set_block(0, 2, cho.C);
  sys.y_ss = y_ss;
  return sys;
}

Matrix DiscreteLinearModel::state_noise() const { return symmetrize(E * Q * mat_transpose(E)); }

void DiscreteLinearModel::validate() const {
  const std::size_t n = A.rows();
  auto fail = [](const std::string& what) { throw DimensionError("DiscreteLinearModel: " + what); };
  if (!A.is_square()) fail("A must be square, got " + shape_string(A));
  if (B.rows() != n) fail("B has " + std::to_string(B.rows()) + " rows, expected " + std::to_string(n));
  if (E.rows() != n) fail("E has " + std::to_string(E.rows()) + " rows, expected " + std::to_string(n));
  if (C.cols() != n) fail("C has " + std::to_string(C.cols()) + " cols, expected " + std::to_string(n));
  if (Q.rows() != E.cols() || !Q.is_square()) fail("Q must be " + std::to_string(E.cols()) + " square");
  if (R.rows() != C.rows() || !R.is_square()) fail("R must be " + std::to_string(C.rows()) + " square");
}

DiscreteLinearModel discretize_zoh(const ContinuousLinearRealization& sys, double Ts,
                                   const Matrix& Q, const Matrix& R) {
  if (!(Ts > 0.0)) throw ParameterError("Ts must be > 0, got " + std::to_string(Ts));
  const std::size_t n = sys.A_c.rows();
  const std::size_t m = sys.B_c.cols();
  const std::size_t q = sys.E_c.cols();
  if (sys.B_c.rows() != n || sys.E_c.rows() != n || sys.C.cols() != n)
    throw DimensionError("discretize_zoh: inconsistent continuous realization");

  // exp([[A, B, E], [0, 0, 0]] * Ts) = [[Ad, Bd, Ed], [0, I, 0], [0, 0, I]].
  Matrix aug(n + m + q, n + m + q);
  aug.set_block(0, 0, sys.A_c);
  aug.set_block(0, n, sys.B_c);
  aug.set_block(0, n + m, sys.E_c);
  const Matrix phi = mat_exp(mat_scale(aug, Ts));

  DiscreteLinearModel d;
  d.A = phi.block(0, 0, n, n);
  d.B = phi.block(0, n, n, m);
  d.E = phi.block(0, n + m, n, q);
  d.C = sys.C;
  d.Q = Q;
  d.R = R;
  d.Ts = Ts;
  d.y_ss = sys.y_ss;
  d.validate();
  return d;
}

Matrix discretize_diffusion(const Matrix& A_c, const Matrix& sigma, double Ts) {
  if (!(Ts > 0.0)) throw ParameterError("Ts must be > 0, got " + std::to_string(Ts));
  if (!A_c.is_square() || sigma.rows() != A_c.rows())
    throw DimensionError("discretize_diffusion: " + shape_string(A_c) + " vs sigma " +
                         shape_string(sigma));
  const std::size_t n = A_c.rows();
  // exp([[-A, S], [0, A^T]] Ts) = [[*, F12], [0, F22]] with F22 = exp(A^T Ts); Qd = F22^T F12.
  Matrix vl(2 * n, 2 * n);
  vl.set_block(0, 0, -A_c);
  vl.set_block(0, n, sigma * mat_transpose(sigma));
  vl.set_block(n, n, mat_transpose(A_c));
  const Matrix phi = mat_exp(mat_scale(vl, Ts));
  const Matrix f12 = phi.block(0, n, n, n);
  const Matrix f22 = phi.block(n, n, n, n);
  return symmetrize(mat_transpose(f22) * f12);
}

Matrix noise_factor(const Matrix& cov) {
  if (max_abs(cov) == 0.0) return Matrix(cov.rows(), cov.cols());
  return cholesky_lower(symmetrize(cov));
}

LinearSimulation simulate_linear(const DiscreteLinearModel& model, const InputSchedule& sched,
                                 std::size_t steps, std::uint64_t seed, double t0) {
  model.validate();
  if (sched.n_inputs() != model.B.cols() || sched.n_disturbances() != model.E.cols())
    throw DimensionError("simulate_linear: schedule channels do not match model");

  const Matrix lq = noise_factor(model.Q);
  const Matrix lr = noise_factor(model.R);
  GaussianSource rng(seed);

  LinearSimulation sim;
  sim.times.reserve(steps);
  sim.states.reserve(steps);
  sim.outputs.reserve(steps);
  sim.measurements.reserve(steps);

  Matrix offset(model.n_outputs(), 1, model.y_ss);
  Matrix x(model.n_states(), 1);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * model.Ts;
    const Matrix w = lq * rng.standard_normal_vector(lq.cols());
    const Matrix v = lr * rng.standard_normal_vector(lr.cols());
    const Matrix z = model.C * x + offset;
    sim.times.push_back(t);
    sim.states.push_back(x);
    sim.outputs.push_back(z);
    sim.measurements.push_back(z + v);
    x = model.A * x + model.B * sched.inputs_at(t) + model.E * (sched.disturbances_at(t) + w);
  }
  return sim;
}

}  // namespace cdkf
