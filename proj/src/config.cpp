#include "cdkf/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cdkf/errors.hpp"
#include "cdkf/linear_kalman.hpp"
#include "cdkf/sde.hpp"

namespace cdkf {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model", "K_u",   "tau_u", "K_d",  "tau_d", "A",  "B",  "E",         "C",
      "Ts",    "Q",     "R",     "sigma", "y_ss", "kf_process_noise",       "euler_dt",
      "alpha", "kappa", "beta",  "x0",   "P0",    "t0", "simulator", "simulate_noise"};
  return keys;
}

double as_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError("config key '" + key + "' must be finite");
  return v;
}

// number -> 1x1, [a, b, ...] -> column, [[...], ...] -> matrix.
Matrix as_matrix(const json& j, const std::string& key) {
  if (j.is_number()) return Matrix(1, 1, as_number(j, key));
  if (!j.is_array() || j.empty()) throw ConfigError("config key '" + key + "' must be a number or array");
  if (!j.front().is_array()) {
    Matrix v(j.size(), 1);
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = as_number(j[i], key);
    return v;
  }
  const std::size_t cols = j.front().size();
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError("config key '" + key + "' has ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = as_number(j[r][c], key);
  }
  return m;
}

// Like as_matrix but a flat vector means a diagonal.
Matrix as_square(const json& j, const std::string& key) {
  Matrix m = as_matrix(j, key);
  if (m.cols() == 1 && m.rows() > 1) {
    Matrix d(m.rows(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) d(i, i) = m[i];
    return d;
  }
  if (!m.is_square()) throw ConfigError("config key '" + key + "' must be square");
  return m;
}

std::string as_string(const json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError("config key '" + key + "' must be a string");
  return j.get<std::string>();
}

}  // namespace

ModelConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : root.items())
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");

  ModelConfig cfg;
  auto num = [&](const char* key, double& out) {
    if (root.contains(key)) out = as_number(root[key], key);
  };
  if (root.contains("model")) {
    const auto m = as_string(root["model"], "model");
    if (m == "glucose") cfg.model = ModelKind::glucose;
    else if (m == "discrete") cfg.model = ModelKind::discrete;
    else throw ConfigError("config 'model' must be \"glucose\" or \"discrete\", got \"" + m + "\"");
  }
  num("K_u", cfg.params.K_u);
  num("tau_u", cfg.params.tau_u);
  num("K_d", cfg.params.K_d);
  num("tau_d", cfg.params.tau_d);
  num("Ts", cfg.Ts);
  num("y_ss", cfg.y_ss);
  num("t0", cfg.t0);
  num("euler_dt", cfg.ukf.euler_dt);
  num("alpha", cfg.ukf.alpha);
  num("kappa", cfg.ukf.kappa);
  num("beta", cfg.ukf.beta);
  cfg.ukf.Ts = cfg.Ts;
  if (!(cfg.Ts > 0.0)) throw ConfigError("config 'Ts' must be > 0");
  if (!(cfg.ukf.euler_dt > 0.0)) throw ConfigError("config 'euler_dt' must be > 0");

  if (root.contains("Q")) cfg.Q = as_square(root["Q"], "Q");
  if (root.contains("R")) cfg.R = as_square(root["R"], "R");
  if (root.contains("sigma")) cfg.sigma = as_matrix(root["sigma"], "sigma");
  if (root.contains("P0")) cfg.P0 = as_square(root["P0"], "P0");
  if (root.contains("x0")) cfg.x0 = as_matrix(root["x0"], "x0");
  for (const char* key : {"A", "B", "E", "C"}) {
    if (!root.contains(key)) continue;
    if (cfg.model != ModelKind::discrete)
      throw ConfigError(std::string("config key '") + key + "' needs \"model\": \"discrete\"");
  }
  if (root.contains("A")) cfg.A = as_matrix(root["A"], "A");
  if (root.contains("B")) cfg.B = as_matrix(root["B"], "B");
  if (root.contains("E")) cfg.E = as_matrix(root["E"], "E");
  if (root.contains("C")) {
    cfg.C = as_matrix(root["C"], "C");
    if (cfg.C.cols() == 1 && cfg.C.rows() > 1) cfg.C = mat_transpose(cfg.C);  // flat list = one row
  }
  if (cfg.model == ModelKind::discrete && cfg.A.empty())
    throw ConfigError("discrete model needs 'A'");

  if (root.contains("kf_process_noise")) {
    const auto s = as_string(root["kf_process_noise"], "kf_process_noise");
    if (s == "input") cfg.kf_noise = KfNoise::input;
    else if (s == "diffusion") cfg.kf_noise = KfNoise::diffusion;
    else throw ConfigError("config 'kf_process_noise' must be \"input\" or \"diffusion\"");
  }
  if (root.contains("simulator")) {
    const auto s = as_string(root["simulator"], "simulator");
    if (s == "linear") cfg.simulator = SimulatorKind::linear;
    else if (s == "sde") cfg.simulator = SimulatorKind::sde;
    else throw ConfigError("config 'simulator' must be \"linear\" or \"sde\"");
  }
  if (root.contains("simulate_noise")) {
    if (!root["simulate_noise"].is_boolean()) throw ConfigError("config 'simulate_noise' must be a boolean");
    cfg.simulate_noise = root["simulate_noise"].get<bool>();
  }
  if (cfg.model == ModelKind::discrete &&
      (cfg.simulator == SimulatorKind::sde || cfg.kf_noise == KfNoise::diffusion))
    throw ConfigError("discrete model supports only the linear simulator and input noise");
  if (cfg.model == ModelKind::glucose) {
    try {
      cfg.params.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }
  return cfg;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ContinuousLinearRealization continuous_model(const ModelConfig& cfg) {
  if (cfg.model != ModelKind::glucose) throw ConfigError("discrete config has no continuous model");
  return build_glucose_model(cfg.params, cfg.y_ss);
}

namespace {

Matrix q_or_default(const ModelConfig& cfg, std::size_t q) {
  if (!cfg.Q.empty()) return cfg.Q;
  if (cfg.model == ModelKind::discrete) return Matrix::Identity(q);
  return Matrix(1, 1, placeholder::Q);
}

Matrix r_or_default(const ModelConfig& cfg) {
  return cfg.R.empty() ? Matrix(1, 1, placeholder::R) : cfg.R;
}

}  // namespace

Matrix diffusion_matrix(const ModelConfig& cfg) {
  const auto sys = continuous_model(cfg);
  const std::size_t n = sys.n_states();
  if (cfg.sigma.empty()) {
    const Matrix Q = q_or_default(cfg, sys.E_c.cols());
    Matrix s(n, n);
    s(0, 0) = placeholder::sigma_u;
    s(2, 2) = std::sqrt(Q(0, 0) * cfg.Ts);
    return s;
  }
  if (cfg.sigma.rows() == 1 && cfg.sigma.cols() == 1) return sys.E_c * cfg.sigma[0];
  if (cfg.sigma.cols() == 1 && cfg.sigma.rows() == n) {
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i) s(i, i) = cfg.sigma[i];
    return s;
  }
  if (cfg.sigma.rows() != n)
    throw ConfigError("config 'sigma' must have " + std::to_string(n) + " rows, got " +
                      shape_string(cfg.sigma));
  return cfg.sigma;
}

DiscreteLinearModel discrete_model(const ModelConfig& cfg) {
  try {
    if (cfg.model == ModelKind::glucose) {
      const auto sys = continuous_model(cfg);
      return discretize_zoh(sys, cfg.Ts, q_or_default(cfg, sys.E_c.cols()), r_or_default(cfg));
    }
    DiscreteLinearModel m;
    m.A = cfg.A;
    const std::size_t n = m.A.rows();
    m.B = cfg.B.empty() ? Matrix(n, 1) : cfg.B;
    m.E = cfg.E.empty() ? Matrix::Identity(n) : cfg.E;
    m.C = cfg.C.empty() ? Matrix(1, n, 1.0) : cfg.C;
    m.Q = q_or_default(cfg, m.E.cols());
    m.R = r_or_default(cfg);
    m.Ts = cfg.Ts;
    m.y_ss = cfg.y_ss;
    m.validate();
    return m;
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("inconsistent model shapes: ") + e.what());
  }
}

Matrix kf_process_noise(const ModelConfig& cfg, const DiscreteLinearModel& model) {
  if (cfg.kf_noise == KfNoise::input) return model.state_noise();
  return discretize_diffusion(continuous_model(cfg).A_c, diffusion_matrix(cfg), cfg.Ts);
}

FilterBundle build_bundle(const ModelConfig& cfg) {
  FilterBundle b;
  b.linear = discrete_model(cfg);
  const std::size_t n = b.linear.n_states();
  b.gain = stationary_gain(solve_dare(b.linear.A, b.linear.C, kf_process_noise(cfg, b.linear),
                                      b.linear.R),
                           b.linear.C, b.linear.R);
  b.R = b.linear.R;
  b.cfg = cfg.ukf;
  b.cfg.Ts = cfg.Ts;
  b.t0 = cfg.t0;
  b.x0 = cfg.x0.empty() ? Matrix(n, 1) : cfg.x0;
  if (b.x0.rows() != n || !b.x0.is_vector())
    throw ConfigError("config 'x0' must have " + std::to_string(n) + " entries");

  if (cfg.model == ModelKind::glucose) {
    const auto sys = continuous_model(cfg);
    const Matrix sigma = diffusion_matrix(cfg);
    b.sde = std::make_shared<LinearSdeModel>(wrap_linear_as_sde(sys, sigma));
    if (cfg.P0.empty())
      b.P0 = solve_dare(b.linear.A, b.linear.C, discretize_diffusion(sys.A_c, sigma, cfg.Ts),
                        b.linear.R);
  } else if (cfg.P0.empty()) {
    b.P0 = b.gain.P_pred;
  }
  if (!cfg.P0.empty()) b.P0 = cfg.P0;
  if (b.P0.rows() != n) throw ConfigError("config 'P0' must be " + std::to_string(n) + "x" + std::to_string(n));
  return b;
}

}  // namespace cdkf
