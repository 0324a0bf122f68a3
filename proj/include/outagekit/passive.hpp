#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace outagekit::passive {

/// One dated scan-pipeline observation. `active` excludes hosts parked
/// in the eviction queue, which the pipeline keeps visible for up to 72
/// hours after they stop responding.
struct HostSnapshot {
  std::string date; // ISO yyyy-mm-dd
  uint64_t total = 0;
  uint64_t pending = 0;
  std::string country;

  uint64_t active() const { return total - pending; }
};

struct BaselineBand {
  uint64_t low = 0;
  uint64_t high = 0;
  uint64_t reference = 0; // pre-event denominator for reductions
  std::vector<std::string> source_dates;
};

/// Band over `monthly` totals with the snapshot at `reference_date` as
/// the reduction denominator. Requires at least three snapshots; errors
/// when the reference date is absent.
BaselineBand build_baseline(const std::vector<HostSnapshot>& monthly,
                            const std::string& reference_date);

/// Signed percentage points versus the baseline reference:
/// -100 * (1 - active / reference). Zero at the reference value.
double reduction(uint64_t active, const BaselineBand& band);

struct PendingDecomposition {
  double active_fraction = 0.0;
  double pending_fraction = 0.0;
  bool carryover = false;     // pending share at or above the threshold
  bool empty_snapshot = false; // total was zero; fractions undefined
};

constexpr double kDefaultCarryoverThreshold = 0.80;

PendingDecomposition decompose_pending(const HostSnapshot& snapshot,
                                       double carryover_threshold = kDefaultCarryoverThreshold);

/// Which count detect_onset thresholds against. Totals lag enforcement
/// by up to 72 hours of eviction-queue carry-over; active counts are
/// the honest signal and the default.
enum class OnsetBasis { active_hosts, total_hosts };

struct OnsetResult {
  bool found = false;
  std::string date;
  // Calendar dates missing between the previous observation and the
  // onset; gaps are annotated, never interpolated.
  std::optional<std::pair<std::string, std::string>> gap;
};

OnsetResult detect_onset(const std::vector<HostSnapshot>& series, const BaselineBand& band,
                         double threshold = 0.5, OnsetBasis basis = OnsetBasis::active_hosts);

struct AnomalyWindow {
  std::string start;
  std::string end;
  double peak_ratio = 0.0;
  std::string peak_date;
};

/// Maximal windows where the country total runs at ratio_threshold or
/// more of its baseline reference while the control stays inside its
/// own band. A control observation missing or out of band gates the
/// date out of any window.
std::vector<AnomalyWindow> detect_inflation(const std::vector<HostSnapshot>& series,
                                            const BaselineBand& band,
                                            const std::vector<HostSnapshot>& control_series,
                                            const BaselineBand& control_band,
                                            double ratio_threshold = 1.5);

struct EventAnalysis {
  OnsetResult onset;
  std::string floor_date;
  uint64_t floor_active = 0;
  std::map<std::string, double> reduction_pp;  // per key date
  std::map<std::string, bool> carryover_flags; // per date in window
  std::vector<AnomalyWindow> anomaly_windows;
};

/// CSV input "date,total,pending,country"; a blank pending field is
/// treated as zero and reported in `warnings`.
std::vector<HostSnapshot> read_series_csv(std::istream& in, std::vector<std::string>* warnings);
std::vector<HostSnapshot> read_series_csv_file(const std::string& path,
                                               std::vector<std::string>* warnings);

void export_event_json(const EventAnalysis& analysis, const BaselineBand& band,
                       std::ostream& out);

/// Per-date CSV with totals, actives, pending share, reduction and
/// carry-over flag.
void export_series_csv(const std::vector<HostSnapshot>& series, const BaselineBand& band,
                       double carryover_threshold, std::ostream& out);

} // namespace outagekit::passive
