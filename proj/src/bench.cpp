#include "cdkf/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cdkf/decompositions.hpp"
#include "cdkf/ekf.hpp"
#include "cdkf/errors.hpp"
#include "cdkf/random.hpp"

#ifdef __linux__
#include <sched.h>
#include <sys/utsname.h>
#endif

#ifndef CDKF_BUILD_TYPE
#define CDKF_BUILD_TYPE "unknown"
#endif

namespace cdkf {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kBatchThresholdNs = 1000.0;
constexpr std::size_t kMinBatch = 10;
constexpr std::size_t kMaxBatch = 4096;

// Opaque use of a value so the call producing it cannot be elided.
template <class T>
inline void keep(const T& value) {
  asm volatile("" : : "g"(&value) : "memory");
}

double elapsed_ns(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::nano>(b - a).count();
}

double element_sum(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v;
  return s;
}

// Calls per timed repetition: 1 unless a single call is below the threshold.
template <class Call>
std::size_t choose_batch(Call&& call) {
  constexpr int probes = 5;
  const auto t0 = Clock::now();
  for (int i = 0; i < probes; ++i) keep(call());
  const double per_call = elapsed_ns(t0, Clock::now()) / probes;
  if (per_call >= kBatchThresholdNs) return 1;
  const auto want = static_cast<std::size_t>(std::ceil(kBatchThresholdNs / std::max(per_call, 1.0)));
  return std::clamp(want, kMinBatch, kMaxBatch);
}

// Times `call` batch times, returns ns per call and the last result.
template <class Call>
auto timed(std::size_t batch, Call&& call, double& ns) {
  const auto t0 = Clock::now();
  auto result = call();
  keep(result);
  for (std::size_t b = 1; b < batch; ++b) {
    result = call();
    keep(result);
  }
  ns = elapsed_ns(t0, Clock::now()) / static_cast<double>(batch);
  return result;
}

// Generic loop for independent repetitions: prepare() builds fresh inputs outside the clock.
template <class Prepare, class Run>
TimingEntry run_independent(const std::string& op, const std::string& size, std::size_t reps,
                            Prepare&& prepare, Run&& run, double& checksum) {
  auto probe_input = prepare();
  const std::size_t batch = choose_batch([&] { return run(probe_input); });
  const std::size_t warmup = reps / 10;
  std::vector<double> samples;
  samples.reserve(reps);
  for (std::size_t r = 0; r < warmup + reps; ++r) {
    const auto input = prepare();
    double ns = 0.0;
    const Matrix result = timed(batch, [&] { return run(input); }, ns);
    if (r >= warmup) {
      samples.push_back(ns);
      checksum += element_sum(result);
    }
  }
  return summarize(op, size, samples);
}

void check_reps(std::size_t reps, const char* who) {
  if (reps < kMinBenchReps)
    throw ParameterError(std::string(who) + ": reps must be >= " + std::to_string(kMinBenchReps));
}

Matrix random_matrix(GaussianSource& rng, std::size_t n) {
  Matrix m(n, n);
  for (double& v : m.data()) v = rng.standard_normal();
  return m;
}

Matrix random_spd(GaussianSource& rng, std::size_t n) {
  const Matrix m = random_matrix(rng, n);
  Matrix a = m * mat_transpose(m);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
  return symmetrize(a);
}

std::string size_label(std::size_t n) { return "n=" + std::to_string(n); }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string host_description() {
#ifdef __linux__
  utsname u{};
  if (uname(&u) == 0)
    return std::string(u.sysname) + " " + u.release + " " + u.machine;
#endif
  return "unknown";
}

std::string build_description() {
#ifdef __VERSION__
  return std::string("cxx ") + __VERSION__ + ", " + CDKF_BUILD_TYPE;
#else
  return CDKF_BUILD_TYPE;
#endif
}

void stamp(TimingReport& report) {
  report.timestamp = utc_timestamp();
  report.build = build_description();
  report.host = host_description();
}

}  // namespace

TimingEntry summarize(std::string op, std::string size, std::span<const double> samples_ns) {
  if (samples_ns.empty()) throw ParameterError("summarize: no samples");
  TimingEntry e;
  e.op = std::move(op);
  e.size = std::move(size);
  e.reps = samples_ns.size();

  double sum = 0.0;
  for (double s : samples_ns) sum += s;
  e.mean_ns = sum / static_cast<double>(e.reps);
  double ss = 0.0;
  for (double s : samples_ns) ss += (s - e.mean_ns) * (s - e.mean_ns);
  e.std_ns = e.reps > 1 ? std::sqrt(ss / static_cast<double>(e.reps - 1)) : 0.0;

  std::vector<double> sorted(samples_ns.begin(), samples_ns.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  e.median_ns = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  e.min_ns = sorted.front();
  return e;
}

TimingReport bench_matrix_ops(std::span<const std::size_t> sizes, std::size_t reps,
                              std::uint64_t seed) {
  check_reps(reps, "bench_matrix_ops");
  if (sizes.empty()) throw ParameterError("bench_matrix_ops: sizes must be non-empty");
  for (std::size_t n : sizes)
    if (n == 0) throw ParameterError("bench_matrix_ops: sizes must be >= 1");

  TimingReport report;
  GaussianSource rng(seed);
  for (std::size_t n : sizes) {
    const std::string label = size_label(n);
    using Pair = std::pair<Matrix, Matrix>;
    auto pair = [&] { return Pair{random_matrix(rng, n), random_matrix(rng, n)}; };

    report.entries.push_back(run_independent(
        "mat_mul", label, reps, pair, [](const Pair& p) { return mat_mul(p.first, p.second); },
        report.checksum));
    report.entries.push_back(run_independent(
        "cholesky", label, reps, [&] { return random_spd(rng, n); },
        [](const Matrix& a) { return cholesky_lower(a); }, report.checksum));
    report.entries.push_back(run_independent(
        "mat_scale", label, reps, pair, [](const Pair& p) { return mat_scale(p.first, 1.5); },
        report.checksum));
    report.entries.push_back(run_independent(
        "mat_add", label, reps, pair, [](const Pair& p) { return mat_add(p.first, p.second); },
        report.checksum));
  }
  stamp(report);
  return report;
}

TimingReport bench_filter_steps(const FilterBundle& bundle, std::size_t reps, const UkfConfig& cfg,
                                std::uint64_t seed) {
  check_reps(reps, "bench_filter_steps");
  if (!bundle.sde) throw ParameterError("bench_filter_steps: bundle has no SDE model");
  const std::size_t warmup = reps / 10;
  const std::size_t total = warmup + reps;

  const auto& lin = bundle.linear;
  const InputSchedule sched = InputSchedule::zero(lin.B.cols(), lin.E.cols());
  const LinearSimulation data = simulate_linear(lin, sched, total + 1, seed, bundle.t0);
  const Matrix u = sched.inputs_at(0.0);
  const Matrix d = sched.disturbances_at(0.0);
  const SdeModel& sde = *bundle.sde;
  const UkfWeights weights = ukf_weights(sde.n_states(), cfg);
  const std::string label = size_label(lin.n_states());

  auto initial = [&](const Matrix& P) {
    FilterState s;
    s.x = bundle.x0;
    s.P = P;
    s.t = bundle.t0;
    s.kind = StateKind::filtered;
    return s;
  };

  TimingReport report;
  // One filter: alternate timed predict and update over the shared measurement stream.
  auto run = [&](const std::string& name, FilterState filtered, auto&& predict, auto&& update) {
    std::vector<double> pred_ns, upd_ns;
    pred_ns.reserve(reps);
    upd_ns.reserve(reps);
    const std::size_t pred_batch = choose_batch([&] { return predict(filtered); });
    const auto probe = predict(filtered);
    const std::size_t upd_batch = choose_batch([&] { return update(probe, data.measurements[1]); });
    for (std::size_t r = 0; r < total; ++r) {
      double tp = 0.0, tu = 0.0;
      const auto predicted = timed(pred_batch, [&] { return predict(filtered); }, tp);
      filtered = timed(upd_batch, [&] { return update(predicted, data.measurements[r + 1]); }, tu);
      if (r >= warmup) {
        pred_ns.push_back(tp);
        upd_ns.push_back(tu);
        report.checksum += element_sum(filtered.x);
      }
    }
    report.entries.push_back(summarize(name + "_predict", label, pred_ns));
    report.entries.push_back(summarize(name + "_update", label, upd_ns));
  };

  run("kf", initial(bundle.gain.P_filt),
      [&](const FilterState& s) { return kf_predict(s, lin, u, d, bundle.gain); },
      [&](const FilterState& s, const Matrix& y) { return kf_update(s, y, bundle.gain, lin).state; });

  run("ekf", initial(bundle.P0),
      [&](const FilterState& s) { return ekf_predict(s, sde, sched, cfg.Ts, cfg.euler_dt); },
      [&](const FilterState& s, const Matrix& y) { return ekf_update(s, y, sde, bundle.R).state; });

  // The UKF update stage includes the measurement statistics of the predicted points.
  run("ukf", initial(bundle.P0),
      [&](const FilterState& s) { return ukf_predict(s, sde, sched, cfg, weights); },
      [&](const UkfPrediction& p, const Matrix& y) {
        const auto stats = ukf_measurement_stats(p.sigma_points, weights, sde, bundle.R);
        return ukf_update(p.state, y, stats).state;
      });

  stamp(report);
  return report;
}

void write_timing_csv(const TimingReport& report, std::ostream& os) {
  os << kTimingCsvHeader << '\n';
  os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : report.entries)
    os << e.op << ',' << e.size << ',' << e.reps << ',' << e.mean_ns << ',' << e.median_ns << ','
       << e.std_ns << ',' << e.min_ns << '\n';
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <class T>
T parse_cell(const std::string& text, std::size_t line_no) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw InputError("timing csv line " + std::to_string(line_no) + ": bad number '" + text + "'");
  return value;
}

}  // namespace

TimingReport read_timing_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("timing csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTimingCsvHeader) throw InputError("timing csv: unexpected header '" + line + "'");

  TimingReport report;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != 7)
      throw InputError("timing csv line " + std::to_string(line_no) + ": expected 7 cells");
    TimingEntry e;
    e.op = cells[0];
    e.size = cells[1];
    if (e.op.empty() || e.size.empty())
      throw InputError("timing csv line " + std::to_string(line_no) + ": empty op or size");
    e.reps = parse_cell<std::size_t>(cells[2], line_no);
    e.mean_ns = parse_cell<double>(cells[3], line_no);
    e.median_ns = parse_cell<double>(cells[4], line_no);
    e.std_ns = parse_cell<double>(cells[5], line_no);
    e.min_ns = parse_cell<double>(cells[6], line_no);
    report.entries.push_back(std::move(e));
  }
  return report;
}

void write_timing_jsonl(const TimingReport& report, std::ostream& os) {
  nlohmann::json meta = {{"record", "meta"},         {"timestamp", report.timestamp},
                         {"build", report.build},    {"host", report.host},
                         {"checksum", report.checksum}};
  os << meta.dump() << '\n';
  for (const auto& e : report.entries) {
    nlohmann::json row = {{"record", "timing"}, {"op", e.op},         {"size", e.size},
                          {"reps", e.reps},     {"mean_ns", e.mean_ns}, {"median_ns", e.median_ns},
                          {"std_ns", e.std_ns}, {"min_ns", e.min_ns}};
    os << row.dump() << '\n';
  }
}

bool pin_to_current_cpu() {
#ifdef __linux__
  const int cpu = sched_getcpu();
  if (cpu < 0) return false;
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu, &set);
  return sched_setaffinity(0, sizeof set, &set) == 0;
#else
  return false;
#endif
}

}  // namespace cdkf
