#pragma once

// CSV files at the command-line boundary. Glucose is always absolute mg/dL here.
//
//   CGM     time_min,glucose_mgdl        empty glucose cell = dropout
//   events  time_min,kind,value          kind in {bolus_IU, basal_IU_per_min, meal_g}

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdkf/run_filter.hpp"
#include "cdkf/schedule.hpp"

namespace cdkf {

struct CgmRecord {
  double time_min = 0.0;
  std::optional<double> glucose_mgdl;
};

enum class EventKind { bolus_IU, basal_IU_per_min, meal_g };

EventKind parse_event_kind(std::string_view name);
std::string_view to_string(EventKind kind);

struct EventRecord {
  double time_min = 0.0;
  EventKind kind = EventKind::meal_g;
  double value = 0.0;
};

/// Reads a CGM file. Times must be strictly increasing; glucose outside (0, 1000) is
/// warned about on stderr. Throws InputError naming the offending line.
std::vector<CgmRecord> read_cgm_csv(std::istream& is);
std::vector<CgmRecord> read_cgm_csv(const std::filesystem::path& path);
void write_cgm_csv(std::span<const CgmRecord> records, std::ostream& os);

/// Reads an events file. Unknown kinds, negative values or non-finite times throw InputError.
std::vector<EventRecord> read_events_csv(std::istream& is);
std::vector<EventRecord> read_events_csv(const std::filesystem::path& path);

/// One insulin input and one CHO disturbance channel. Basal sets u until the next basal
/// event; a bolus adds value/Ts to u and a meal adds value/Ts to d over [t, t + Ts).
InputSchedule schedule_from_events(std::span<const EventRecord> events, double Ts);

/// CGM rows to filter measurements. Throws InputError at the first row that is more
/// than 1e-6 min off the t0 + k*Ts grid.
std::vector<Measurement> to_measurements(std::span<const CgmRecord> records, double t0, double Ts);

/// Per-step filter output for a scalar sensor:
/// k,t_min,y,y_hat_pred,x_hat_filt_0..,P_diag_0..,e,Re,NIS,missing_flag
/// The measured y is recovered as y_hat_pred + e; missing cells are written as nan.
void write_filter_csv(std::span<const FilterStep> steps, std::ostream& os);

/// Innovation summary over the non-missing steps.
struct InnovationSummary {
  std::size_t steps = 0;
  std::size_t updates = 0;
  double mean = 0.0;
  double variance = 0.0;
  double mean_nis = 0.0;
};

InnovationSummary summarize_innovations(std::span<const FilterStep> steps);

}  // namespace cdkf
