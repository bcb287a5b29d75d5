#pragma once

// Linear insulin/CHO to subcutaneous glucose model.
//
// Each channel is the transfer function K / (tau*s + 1)^2. The combined
// continuous model stacks the insulin realization (states 0, 1) on top of the
// CHO realization (states 2, 3); this ordering is fixed so saved states are
// portable. Outputs are deviations from the steady-state glucose y_ss.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cdkf/matrix.hpp"
#include "cdkf/schedule.hpp"

namespace cdkf {

/// Steady-state subcutaneous glucose concentration, mg/dL.
inline constexpr double kSteadyStateGlucose = 100.0;

struct TransferParams {
  double K_u = 0.0;    // mg/dL per IU/min (steady-state step gain of insulin)
  double tau_u = 0.0;  // min
  double K_d = 0.0;    // mg/dL per g/min (steady-state step gain of CHO)
  double tau_d = 0.0;  // min

  /// Throws ParameterError unless both time constants are positive.
  void validate() const;
};

struct SecondOrderRealization {
  Matrix A;  // 2x2
  Matrix B;  // 2x1
  Matrix C;  // 1x2
};

/// Controllable canonical form of K / (tau*s + 1)^2:
/// A = [[-2/tau, -1/tau^2], [1, 0]], B = [1, 0]^T, C = [0, K/tau^2].
SecondOrderRealization realize_second_order(double gain, double tau);

struct ContinuousLinearRealization {
  Matrix A_c;  // n x n, 1/min
  Matrix B_c;  // n x m
  Matrix E_c;  // n x q
  Matrix C;    // p x n
  double y_ss = kSteadyStateGlucose;

  std::size_t n_states() const noexcept { return A_c.rows(); }
};

ContinuousLinearRealization build_glucose_model(const TransferParams& params,
                                                double y_ss = kSteadyStateGlucose);

/// x_{k+1} = A x_k + B u_k + E (d_k + w_k),  y_k = C x_k + v_k (+ y_ss in absolute units),
/// with w_k ~ N(0, Q) and v_k ~ N(0, R).
struct DiscreteLinearModel {
  Matrix A, B, E, C;
  Matrix Q;  // q x q, covariance of the noise added to the disturbance channel
  Matrix R;  // p x p, (mg/dL)^2
  double Ts = 0.0;
  double y_ss = kSteadyStateGlucose;

  std::size_t n_states() const noexcept { return A.rows(); }
  std::size_t n_outputs() const noexcept { return C.rows(); }

  /// E Q E^T, the state-space process-noise covariance.
  Matrix state_noise() const;

  /// Throws DimensionError on inconsistent shapes.
  void validate() const;
};

/// Exact zero-order-hold discretization from one augmented matrix exponential.
DiscreteLinearModel discretize_zoh(const ContinuousLinearRealization& sys, double Ts,
                                   const Matrix& Q, const Matrix& R);

/// Integral over [0, Ts] of exp(A s) sigma sigma^T exp(A^T s) ds (Van Loan).
/// This is the exact discrete covariance of the continuous diffusion over one sample.
Matrix discretize_diffusion(const Matrix& A_c, const Matrix& sigma, double Ts);

struct LinearSimulation {
  std::vector<double> times;        // k * Ts, min
  std::vector<Matrix> states;       // deviation states
  std::vector<Matrix> outputs;      // noiseless z_k, absolute mg/dL
  std::vector<Matrix> measurements; // y_k, absolute mg/dL
};

/// Iterates the discrete model from x_0 = 0. Inputs are sampled at t_k = t0 + k*Ts.
/// Per step the noise is drawn as w_k first, then v_k, so the stream is fixed by the seed.
LinearSimulation simulate_linear(const DiscreteLinearModel& model, const InputSchedule& sched,
                                 std::size_t steps, std::uint64_t seed, double t0 = 0.0);

/// Lower factor L with L Lᵀ = cov for drawing correlated noise. The zero matrix maps to
/// zero; singular PSD input is handled by the Cholesky jitter policy.
Matrix noise_factor(const Matrix& cov);

}  // namespace cdkf
