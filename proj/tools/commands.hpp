#pragma once

// Subcommands of the cdkf tool, callable in-process. Each returns the exit code:
// 0 success, 1 runtime or numerical failure, 2 usage or configuration error.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cdkf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

using Path = std::filesystem::path;

/// Flags that override the config file.
struct Overrides {
  std::optional<double> euler_dt;
  std::optional<double> ts;
};

struct SimulateOptions {
  std::optional<Path> config;  // none = placeholder defaults
  Path out;                    // CGM csv
  std::optional<Path> states_out;  // default: <out stem>_states<ext>
  std::optional<Path> events;
  std::uint64_t seed = 1;
  std::size_t steps = 288;     // one day at 5 min
  Overrides overrides;
};

struct FilterOptions {
  std::string filter = "kf";
  std::optional<Path> config;
  Path cgm;
  std::optional<Path> events;
  Path out;
  Overrides overrides;
};

struct DareCommandOptions {
  std::optional<Path> config;
  Overrides overrides;
};

struct BenchOptions {
  std::string mode = "matrix";
  std::vector<std::size_t> sizes{2, 4, 8, 16, 32, 64};
  std::size_t reps = 10000;
  std::optional<Path> out;    // none = stdout
  std::optional<Path> jsonl;
  std::optional<Path> config;  // plant for mode=filters
  std::uint64_t seed = 1;
  bool pin = true;
  Overrides overrides;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_filter(const FilterOptions& opt, std::ostream& out, std::ostream& err);
int cmd_dare(const DareCommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err);

/// Runs `body`, mapping exceptions to exit codes and printing them to `err`.
int guarded(const std::function<void()>& body, std::ostream& err);

/// Where cmd_simulate writes states when no path is given.
Path default_states_path(const Path& cgm_out);

}  // namespace cdkf::cli
