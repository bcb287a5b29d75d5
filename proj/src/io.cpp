#include "cdkf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "cdkf/errors.hpp"

namespace cdkf {

namespace {

constexpr double kGridSlack = 1e-6;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string where(const std::string& file, std::size_t line_no) {
  return file + " line " + std::to_string(line_no);
}

double parse_number(const std::string& text, const std::string& ctx) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw InputError(ctx + ": not a number '" + text + "'");
  return v;
}

// Reads the header and yields (line number, cells) for each non-blank row.
template <class Row>
void for_each_row(std::istream& is, const std::string& file, const std::vector<std::string>& header,
                  Row&& row) {
  std::string line;
  if (!std::getline(is, line)) throw InputError(file + ": missing header row");
  if (split_row(line) != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw InputError(file + ": header must be '" + expected + "', got '" + trim(line) + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != header.size())
      throw InputError(where(file, line_no) + ": expected " + std::to_string(header.size()) +
                       " cells, got " + std::to_string(cells.size()));
    row(line_no, cells);
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  return in;
}

}  // namespace

EventKind parse_event_kind(std::string_view name) {
  if (name == "bolus_IU") return EventKind::bolus_IU;
  if (name == "basal_IU_per_min") return EventKind::basal_IU_per_min;
  if (name == "meal_g") return EventKind::meal_g;
  throw InputError("unknown event kind '" + std::string(name) +
                   "' (expected bolus_IU, basal_IU_per_min or meal_g)");
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::bolus_IU: return "bolus_IU";
    case EventKind::basal_IU_per_min: return "basal_IU_per_min";
    case EventKind::meal_g: return "meal_g";
  }
  return "?";
}

std::vector<CgmRecord> read_cgm_csv(std::istream& is) {
  std::vector<CgmRecord> out;
  for_each_row(is, "cgm csv", {"time_min", "glucose_mgdl"},
               [&](std::size_t line_no, const std::vector<std::string>& cells) {
                 const std::string ctx = where("cgm csv", line_no);
                 CgmRecord r;
                 r.time_min = parse_number(cells[0], ctx);
                 if (!std::isfinite(r.time_min)) throw InputError(ctx + ": time must be finite");
                 if (!out.empty() && !(r.time_min > out.back().time_min))
                   throw InputError(ctx + ": times must be strictly increasing");
                 if (!cells[1].empty()) {
                   const double g = parse_number(cells[1], ctx);
                   if (std::isfinite(g)) {
                     if (!(g > 0.0 && g < 1000.0))
                       std::cerr << "warning: " << ctx << ": glucose " << g
                                 << " mg/dL outside (0, 1000)\n";
                     r.glucose_mgdl = g;
                   }
                 }
                 out.push_back(r);
               });
  return out;
}

std::vector<CgmRecord> read_cgm_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_cgm_csv(in);
}

void write_cgm_csv(std::span<const CgmRecord> records, std::ostream& os) {
  os << "time_min,glucose_mgdl\n";
  os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : records) {
    os << r.time_min << ',';
    if (r.glucose_mgdl) os << *r.glucose_mgdl;
    os << '\n';
  }
}

std::vector<EventRecord> read_events_csv(std::istream& is) {
  std::vector<EventRecord> out;
  for_each_row(is, "events csv", {"time_min", "kind", "value"},
               [&](std::size_t line_no, const std::vector<std::string>& cells) {
                 const std::string ctx = where("events csv", line_no);
                 EventRecord e;
                 e.time_min = parse_number(cells[0], ctx);
                 if (!std::isfinite(e.time_min)) throw InputError(ctx + ": time must be finite");
                 try {
                   e.kind = parse_event_kind(cells[1]);
                 } catch (const InputError& err) {
                   throw InputError(ctx + ": " + err.what());
                 }
                 e.value = parse_number(cells[2], ctx);
                 if (!std::isfinite(e.value) || e.value < 0.0)
                   throw InputError(ctx + ": value must be finite and >= 0");
                 out.push_back(e);
               });
  return out;
}

std::vector<EventRecord> read_events_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_events_csv(in);
}

InputSchedule schedule_from_events(std::span<const EventRecord> events, double Ts) {
  if (!(Ts > 0.0)) throw ParameterError("schedule_from_events: Ts must be > 0");

  // Every time the total rate can change; both signals are evaluated there.
  std::vector<double> times;
  for (const auto& e : events) {
    times.push_back(e.time_min);
    if (e.kind != EventKind::basal_IU_per_min) times.push_back(e.time_min + Ts);
  }
  std::sort(times.begin(), times.end());
  std::vector<double> knots;
  for (double t : times)
    if (knots.empty() || t - knots.back() > PiecewiseConstant::kTimeSlack) knots.push_back(t);

  auto active = [&](const EventRecord& e, double t) {
    return e.time_min <= t + PiecewiseConstant::kTimeSlack &&
           t < e.time_min + Ts - PiecewiseConstant::kTimeSlack;
  };

  std::vector<Breakpoint> u, d;
  for (double t : knots) {
    double basal = 0.0, basal_time = -std::numeric_limits<double>::infinity();
    double bolus = 0.0, meal = 0.0;
    for (const auto& e : events) {
      switch (e.kind) {
        case EventKind::basal_IU_per_min:
          if (e.time_min <= t + PiecewiseConstant::kTimeSlack && e.time_min >= basal_time) {
            basal = e.value;
            basal_time = e.time_min;
          }
          break;
        case EventKind::bolus_IU:
          if (active(e, t)) bolus += e.value / Ts;
          break;
        case EventKind::meal_g:
          if (active(e, t)) meal += e.value / Ts;
          break;
      }
    }
    u.push_back({t, basal + bolus});
    d.push_back({t, meal});
  }
  std::vector<PiecewiseConstant> inputs{PiecewiseConstant(std::move(u))};
  std::vector<PiecewiseConstant> disturbances{PiecewiseConstant(std::move(d), true)};
  return InputSchedule(std::move(inputs), std::move(disturbances));
}

std::vector<Measurement> to_measurements(std::span<const CgmRecord> records, double t0, double Ts) {
  if (!(Ts > 0.0)) throw ParameterError("to_measurements: Ts must be > 0");
  std::vector<Measurement> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const double k = std::round((r.time_min - t0) / Ts);
    if (std::abs(r.time_min - t0 - k * Ts) > kGridSlack) {
      std::ostringstream os;
      os.precision(12);
      os << "cgm row " << i + 1 << " (t = " << r.time_min << " min) is not on the grid t0 + k*"
         << Ts << " (t0 = " << t0 << ")";
      throw InputError(os.str());
    }
    Measurement m;
    m.t = t0 + k * Ts;
    if (r.glucose_mgdl) m.y = Matrix(1, 1, *r.glucose_mgdl);
    out.push_back(std::move(m));
  }
  return out;
}

void write_filter_csv(std::span<const FilterStep> steps, std::ostream& os) {
  const std::size_t n = steps.empty() ? 0 : steps.front().filtered.x.rows();
  os << "k,t_min,y,y_hat_pred";
  for (std::size_t i = 0; i < n; ++i) os << ",x_hat_filt_" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",P_diag_" << i;
  os << ",e,Re,NIS,missing_flag\n";
  os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : steps) {
    const double y_hat = s.y_hat_pred[0];
    os << s.filtered.k << ',' << s.filtered.t << ',';
    if (s.innovation) os << y_hat + s.innovation->e[0];
    else os << "nan";
    os << ',' << y_hat;
    for (std::size_t i = 0; i < n; ++i) os << ',' << s.filtered.x[i];
    for (std::size_t i = 0; i < n; ++i) os << ',' << s.filtered.P(i, i);
    if (s.innovation)
      os << ',' << s.innovation->e[0] << ',' << s.innovation->Re(0, 0) << ',' << s.innovation->nis;
    else
      os << ",nan,nan,nan";
    os << ',' << (s.missing ? 1 : 0) << '\n';
  }
}

InnovationSummary summarize_innovations(std::span<const FilterStep> steps) {
  InnovationSummary out;
  out.steps = steps.size();
  double sum = 0.0, nis = 0.0;
  for (const auto& s : steps) {
    if (!s.innovation) continue;
    ++out.updates;
    sum += s.innovation->e[0];
    nis += s.innovation->nis;
  }
  if (out.updates == 0) return out;
  out.mean = sum / static_cast<double>(out.updates);
  out.mean_nis = nis / static_cast<double>(out.updates);
  double ss = 0.0;
  for (const auto& s : steps)
    if (s.innovation) ss += (s.innovation->e[0] - out.mean) * (s.innovation->e[0] - out.mean);
  out.variance = out.updates > 1 ? ss / static_cast<double>(out.updates - 1) : 0.0;
  return out;
}

}  // namespace cdkf
