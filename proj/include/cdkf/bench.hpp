#pragma once

// Micro-benchmarks for the matrix kernels and for the predict/update stages of
// the three filters.
//
// Timing policy: steady_clock; reps/10 warmup repetitions are discarded; inputs
// for each repetition are generated outside the timed region; when one call
// takes under 1 us a repetition times a batch of >= 10 calls and reports the
// per-call average. A checksum over one result per repetition is accumulated so
// the optimizer cannot drop the work. It does not depend on batch sizes, so
// reruns with the same seed reproduce it exactly.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cdkf/run_filter.hpp"
#include "cdkf/ukf.hpp"

namespace cdkf {

/// Repetition count used by default (per-operation averages over 10000 runs).
inline constexpr std::size_t kDefaultBenchReps = 10000;
inline constexpr std::size_t kMinBenchReps = 100;

struct TimingEntry {
  std::string op;
  std::string size;
  std::size_t reps = 0;
  double mean_ns = 0.0;
  double median_ns = 0.0;
  double std_ns = 0.0;
  double min_ns = 0.0;
};

struct TimingReport {
  std::vector<TimingEntry> entries;
  double checksum = 0.0;
  std::string timestamp;
  std::string build;
  std::string host;
};

/// Mean, median, sample standard deviation and minimum of per-call samples.
TimingEntry summarize(std::string op, std::string size, std::span<const double> samples_ns);

/// mat_mul, cholesky, mat_scale and mat_add for every n in `sizes`, in that order.
TimingReport bench_matrix_ops(std::span<const std::size_t> sizes, std::size_t reps,
                              std::uint64_t seed = 1);

/// {kf, ekf, ukf} x {predict, update} on the bundle's plant, every filter fed the same
/// simulated measurement stream. Ts and euler_dt come from `cfg`.
TimingReport bench_filter_steps(const FilterBundle& bundle, std::size_t reps, const UkfConfig& cfg,
                                std::uint64_t seed = 1);

inline constexpr const char* kTimingCsvHeader = "op,size,reps,mean_ns,median_ns,std_ns,min_ns";

void write_timing_csv(const TimingReport& report, std::ostream& os);
/// Parses a report written by write_timing_csv. Throws InputError on a bad header or cell.
TimingReport read_timing_csv(std::istream& is);
/// One metadata record followed by one record per entry.
void write_timing_jsonl(const TimingReport& report, std::ostream& os);

/// Pins the calling thread to the CPU it is running on. Returns false if unsupported.
bool pin_to_current_cpu();

}  // namespace cdkf
