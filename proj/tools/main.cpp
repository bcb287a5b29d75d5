// cdkf: simulate CGM data, filter it, solve the stationary Riccati equation, benchmark.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_overrides(CLI::App* app, cdkf::cli::Overrides& ov) {
  app->add_option("--euler-dt", ov.euler_dt, "Euler substep for EKF/UKF and the SDE simulator, min");
  app->add_option("--ts", ov.ts, "Sampling time, min");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cdkf::cli;
  CLI::App app{"Continuous-discrete Kalman filtering for CGM data"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Write synthetic CGM and ground-truth state CSVs");
  simulate->add_option("--config", sim.config, "Model config (JSON)");
  simulate->add_option("--out", sim.out, "CGM CSV to write")->required();
  simulate->add_option("--states-out", sim.states_out, "State CSV (default <out>_states.csv)");
  simulate->add_option("--events", sim.events, "Events CSV driving the inputs");
  simulate->add_option("--seed", sim.seed, "Noise seed")->capture_default_str();
  simulate->add_option("--steps", sim.steps, "Number of samples")->capture_default_str();
  add_overrides(simulate, sim.overrides);

  FilterOptions flt;
  auto* filter = app.add_subcommand("filter", "Run a filter over a CGM CSV");
  filter->add_option("--filter", flt.filter, "kf, ekf or ukf")->capture_default_str();
  filter->add_option("--config", flt.config, "Model config (JSON)");
  filter->add_option("--cgm", flt.cgm, "CGM CSV")->required();
  filter->add_option("--events", flt.events, "Events CSV");
  filter->add_option("--out", flt.out, "Per-step output CSV")->required();
  add_overrides(filter, flt.overrides);

  DareCommandOptions dre;
  auto* dare = app.add_subcommand("dare", "Print the stationary KF solution");
  dare->add_option("--config", dre.config, "Model config (JSON)");
  add_overrides(dare, dre.overrides);

  BenchOptions bch;
  auto* bench = app.add_subcommand("bench", "Time matrix kernels or filter stages");
  bench->add_option("--mode", bch.mode, "matrix or filters")->capture_default_str();
  bench->add_option("--sizes", bch.sizes, "Matrix sizes (matrix mode)")->delimiter(',');
  bench->add_option("--reps", bch.reps, "Timed repetitions per entry")->capture_default_str();
  bench->add_option("--out", bch.out, "CSV to write (default stdout)");
  bench->add_option("--jsonl", bch.jsonl, "Also write JSON lines here");
  bench->add_option("--config", bch.config, "Model config for filters mode");
  bench->add_option("--seed", bch.seed, "Input seed")->capture_default_str();
  bench->add_flag("!--no-pin", bch.pin, "Do not pin the thread to one cpu");
  add_overrides(bench, bch.overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*simulate) return cmd_simulate(sim, std::cout, std::cerr);
  if (*filter) return cmd_filter(flt, std::cout, std::cerr);
  if (*dare) return cmd_dare(dre, std::cout, std::cerr);
  return cmd_bench(bch, std::cout, std::cerr);
}
