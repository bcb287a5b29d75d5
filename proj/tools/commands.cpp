#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "cdkf/bench.hpp"
#include "cdkf/config.hpp"
#include "cdkf/errors.hpp"
#include "cdkf/io.hpp"
#include "cdkf/linear_kalman.hpp"
#include "cdkf/random.hpp"
#include "cdkf/sde.hpp"

namespace cdkf::cli {

namespace {

// Usage-class failures that are not already typed as such.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ModelConfig resolve_config(const std::optional<Path>& path, const Overrides& ov) {
  ModelConfig cfg = path ? load_config(*path) : parse_config("{}");
  if (ov.ts) {
    if (!(*ov.ts > 0.0)) throw UsageError("--ts must be > 0");
    cfg.Ts = *ov.ts;
  }
  if (ov.euler_dt) {
    if (!(*ov.euler_dt > 0.0)) throw UsageError("--euler-dt must be > 0");
    cfg.ukf.euler_dt = *ov.euler_dt;
  }
  cfg.ukf.Ts = cfg.Ts;
  return cfg;
}

std::ofstream open_out(const Path& path) {
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write '" + path.string() + "'");
  return os;
}

InputSchedule schedule_for(const std::optional<Path>& events, double Ts) {
  if (!events) return schedule_from_events({}, Ts);
  return schedule_from_events(read_events_csv(*events), Ts);
}

void write_states_header(std::ostream& os, std::size_t n) {
  os << "k,t_min";
  for (std::size_t i = 0; i < n; ++i) os << ",x_" << i;
  os << ",z_mgdl\n";
}

// Measurement noise for the SDE simulator comes from its own stream.
constexpr std::uint64_t kMeasurementStreamSalt = 0x9e3779b97f4a7c15ULL;

}  // namespace

Path default_states_path(const Path& cgm_out) {
  Path p = cgm_out;
  p.replace_filename(cgm_out.stem().string() + "_states" + cgm_out.extension().string());
  return p;
}

int guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const ModelConfig cfg = resolve_config(opt.config, opt.overrides);
        DiscreteLinearModel model = discrete_model(cfg);
        const InputSchedule sched = schedule_for(opt.events, cfg.Ts);
        const std::size_t n = model.n_states();
        const Path states_path = opt.states_out ? *opt.states_out : default_states_path(opt.out);

        std::vector<double> times;
        std::vector<Matrix> states, outputs, measured;
        if (cfg.simulator == SimulatorKind::linear) {
          if (!cfg.simulate_noise) {
            model.Q = Matrix(model.Q.rows(), model.Q.cols());
            model.R = Matrix(model.R.rows(), model.R.cols());
          }
          auto sim = simulate_linear(model, sched, opt.steps, opt.seed, cfg.t0);
          times = std::move(sim.times);
          states = std::move(sim.states);
          outputs = std::move(sim.outputs);
          measured = std::move(sim.measurements);
        } else if (opt.steps > 0) {
          Matrix sigma = diffusion_matrix(cfg);
          if (!cfg.simulate_noise) sigma = Matrix(sigma.rows(), sigma.cols());
          const auto sde = wrap_linear_as_sde(continuous_model(cfg), sigma);
          const double ratio = cfg.Ts / cfg.ukf.euler_dt;
          const double stride_d = std::round(ratio);
          if (stride_d < 1.0 || std::abs(ratio - stride_d) > 1e-9 * ratio)
            throw ConfigError("sde simulator needs euler_dt to divide Ts");
          const auto stride = static_cast<std::size_t>(stride_d);
          const Matrix x0(n, 1);
          for (std::size_t k = 0; k < opt.steps; ++k) times.push_back(cfg.t0 + k * cfg.Ts);
          if (opt.steps == 1) {
            states.push_back(x0);
          } else {
            const auto path = euler_maruyama(sde, x0, sched, cfg.t0, times.back(), cfg.ukf.euler_dt,
                                             opt.seed);
            for (std::size_t k = 0; k < opt.steps; ++k) states.push_back(path.states[k * stride]);
          }
          GaussianSource noise(opt.seed ^ kMeasurementStreamSalt);
          const Matrix lr = cfg.simulate_noise ? noise_factor(model.R) : Matrix(1, 1);
          for (const auto& x : states) {
            outputs.push_back(sde.output(x));
            measured.push_back(outputs.back() + lr * noise.standard_normal_vector(lr.cols()));
          }
        }

        std::vector<CgmRecord> cgm;
        for (std::size_t k = 0; k < times.size(); ++k) cgm.push_back({times[k], measured[k][0]});
        auto cgm_os = open_out(opt.out);
        write_cgm_csv(cgm, cgm_os);

        auto st_os = open_out(states_path);
        write_states_header(st_os, n);
        st_os.precision(std::numeric_limits<double>::max_digits10);
        for (std::size_t k = 0; k < times.size(); ++k) {
          st_os << k << ',' << times[k];
          for (std::size_t i = 0; i < n; ++i) st_os << ',' << states[k][i];
          st_os << ',' << outputs[k][0] << '\n';
        }
        out << "wrote " << times.size() << " samples to " << opt.out.string() << " and "
            << states_path.string() << '\n';
      },
      err);
}

int cmd_filter(const FilterOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        FilterKind kind;
        try {
          kind = parse_filter_kind(opt.filter);
        } catch (const InputError& e) {
          throw UsageError(e.what());
        }
        const ModelConfig cfg = resolve_config(opt.config, opt.overrides);
        if (kind != FilterKind::kf && cfg.model != ModelKind::glucose)
          throw ConfigError("ekf/ukf need the glucose model, not an explicit discrete model");
        const FilterBundle bundle = build_bundle(cfg);
        const InputSchedule sched = schedule_for(opt.events, cfg.Ts);
        const auto records = read_cgm_csv(opt.cgm);
        const auto measurements = to_measurements(records, cfg.t0, cfg.Ts);
        const auto steps = run_filter(kind, bundle, measurements, sched);

        auto os = open_out(opt.out);
        write_filter_csv(steps, os);
        const auto s = summarize_innovations(steps);
        out << "filter " << to_string(kind) << ": " << s.steps << " steps, " << s.updates
            << " updates, " << s.steps - s.updates << " missing\n"
            << std::setprecision(6) << "innovation mean " << s.mean << ", variance " << s.variance
            << ", mean NIS " << s.mean_nis << '\n';
      },
      err);
}

int cmd_dare(const DareCommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const ModelConfig cfg = resolve_config(opt.config, opt.overrides);
        const DiscreteLinearModel model = discrete_model(cfg);
        const Matrix Qx = kf_process_noise(cfg, model);
        const Matrix P = solve_dare(model.A, model.C, Qx, model.R);
        const StationaryGain g = stationary_gain(P, model.C, model.R);
        out << std::setprecision(10);
        out << "P =\n" << g.P_pred << "\nK_inf =\n" << g.K_inf << "\nRe_inf =\n" << g.Re_inf
            << "\nP_filt =\n" << g.P_filt << '\n'
            << std::setprecision(3) << "residual = " << dare_residual(P, model.A, model.C, Qx, model.R)
            << '\n';
      },
      err);
}

int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        if (opt.reps < kMinBenchReps)
          throw UsageError("--reps must be >= " + std::to_string(kMinBenchReps));
        if (opt.pin && !pin_to_current_cpu()) err << "warning: could not pin to one cpu\n";
        TimingReport report;
        if (opt.mode == "matrix") {
          if (opt.sizes.empty()) throw UsageError("--sizes must not be empty");
          report = bench_matrix_ops(opt.sizes, opt.reps, opt.seed);
        } else if (opt.mode == "filters") {
          const ModelConfig cfg = resolve_config(opt.config, opt.overrides);
          if (cfg.model != ModelKind::glucose) throw ConfigError("filter bench needs the glucose model");
          report = bench_filter_steps(build_bundle(cfg), opt.reps, cfg.ukf, opt.seed);
        } else {
          throw UsageError("--mode must be matrix or filters, got '" + opt.mode + "'");
        }

        if (opt.out) {
          auto os = open_out(*opt.out);
          write_timing_csv(report, os);
        } else {
          write_timing_csv(report, out);
        }
        if (opt.jsonl) {
          auto os = open_out(*opt.jsonl);
          write_timing_jsonl(report, os);
        }
        err << std::setprecision(17) << "checksum " << report.checksum << '\n';
      },
      err);
}

}  // namespace cdkf::cli
