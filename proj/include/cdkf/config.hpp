#pragma once

// JSON model configuration and the filter bundle built from it.
//
// Keys (all optional; see README for units):
//   model             "glucose" (default) or "discrete"
//   K_u, tau_u, K_d, tau_d   transfer-function parameters (glucose)
//   A, B, E, C        discrete matrices (discrete model only)
//   Ts                sampling time, min
//   Q, R              process noise on the CHO channel, measurement noise (mg/dL)^2
//   sigma             diffusion: scalar (times E_c), per-state vector (diagonal) or n x k matrix
//   y_ss              steady-state glucose, mg/dL
//   kf_process_noise  "input" (E Q E^T, default) or "diffusion" (discretized sigma sigma^T)
//   euler_dt, alpha, kappa, beta   EKF/UKF integration and UKF weights
//   x0, P0, t0        filter initialization; P0 defaults to the stationary prediction
//                     covariance of the diffusion-consistent discrete model
//   simulator         "linear" (default) or "sde"
//   simulate_noise    false turns off process and measurement noise in the simulator
//
// Scalars are accepted wherever a 1x1 matrix is expected, vectors as diagonals for
// square covariances.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cdkf/glucose_model.hpp"
#include "cdkf/run_filter.hpp"
#include "cdkf/ukf.hpp"

namespace cdkf {

/// Unreadable or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Placeholder defaults. The source model publishes no numbers for these; they are
// chosen only to give a stable, observable 4-state system with realistic time scales.
namespace placeholder {
inline constexpr double K_u = -1500.0;  // mg/dL per IU/min
inline constexpr double tau_u = 47.0;   // min
inline constexpr double K_d = 150.0;    // mg/dL per g/min
inline constexpr double tau_d = 40.0;   // min
inline constexpr double Q = 0.25;       // (g/min)^2
inline constexpr double R = 4.0;        // (mg/dL)^2
inline constexpr double sigma_u = 0.002;  // insulin-channel diffusion, keeps P definite
}  // namespace placeholder

enum class ModelKind { glucose, discrete };
enum class KfNoise { input, diffusion };
enum class SimulatorKind { linear, sde };

struct ModelConfig {
  ModelKind model = ModelKind::glucose;
  TransferParams params{placeholder::K_u, placeholder::tau_u, placeholder::K_d, placeholder::tau_d};
  double Ts = 5.0;
  double y_ss = kSteadyStateGlucose;
  Matrix Q;      // q x q; empty = placeholder
  Matrix R;      // p x p; empty = placeholder
  Matrix sigma;  // n x k; empty = placeholder diag(sigma_u, 0, sqrt(Q Ts), 0)
  // explicit discrete model
  Matrix A, B, E, C;
  KfNoise kf_noise = KfNoise::input;
  SimulatorKind simulator = SimulatorKind::linear;
  bool simulate_noise = true;
  UkfConfig ukf;  // Ts is kept equal to the field above
  Matrix x0;
  Matrix P0;
  double t0 = 0.0;
};

ModelConfig parse_config(std::string_view json_text);
ModelConfig load_config(const std::filesystem::path& path);

/// Continuous realization of the glucose model. Throws ConfigError for discrete configs.
ContinuousLinearRealization continuous_model(const ModelConfig& cfg);
/// Diffusion matrix after applying the defaults.
Matrix diffusion_matrix(const ModelConfig& cfg);
/// Discrete plant: ZOH of the glucose model, or the explicit matrices.
DiscreteLinearModel discrete_model(const ModelConfig& cfg);
/// KF process-noise covariance per `kf_noise`.
Matrix kf_process_noise(const ModelConfig& cfg, const DiscreteLinearModel& model);

/// All three filters' inputs. Discrete configs get no SDE model (KF only).
FilterBundle build_bundle(const ModelConfig& cfg);

}  // namespace cdkf
