#include "outagekit/passive.hpp"

#include "outagekit/dates.hpp"
#include "outagekit/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace outagekit::passive {

BaselineBand build_baseline(const std::vector<HostSnapshot>& monthly,
                            const std::string& reference_date) {
  if (monthly.size() < 3)
    throw Error("build_baseline: need at least 3 snapshots, got " +
                std::to_string(monthly.size()));
  BaselineBand band;
  band.low = monthly.front().total;
  band.high = monthly.front().total;
  bool reference_found = false;
  for (const auto& snapshot : monthly) {
    band.low = std::min(band.low, snapshot.total);
    band.high = std::max(band.high, snapshot.total);
    band.source_dates.push_back(snapshot.date);
    if (snapshot.date == reference_date) {
      band.reference = snapshot.total;
      reference_found = true;
    }
  }
  if (!reference_found)
    throw Error("build_baseline: reference date " + reference_date + " absent from series");
  return band;
}

double reduction(uint64_t active, const BaselineBand& band) {
  if (band.reference == 0)
    throw Error("reduction: baseline reference is zero");
  return -100.0 * (1.0 - static_cast<double>(active) / static_cast<double>(band.reference));
}

PendingDecomposition decompose_pending(const HostSnapshot& snapshot, double carryover_threshold) {
  PendingDecomposition result;
  if (snapshot.total == 0) {
    result.empty_snapshot = true;
    return result;
  }
  if (snapshot.pending > snapshot.total)
    throw Error("decompose_pending: pending exceeds total on " + snapshot.date);
  result.pending_fraction =
      static_cast<double>(snapshot.pending) / static_cast<double>(snapshot.total);
  result.active_fraction = 1.0 - result.pending_fraction;
  result.carryover = result.pending_fraction >= carryover_threshold;
  return result;
}

OnsetResult detect_onset(const std::vector<HostSnapshot>& series, const BaselineBand& band,
                         double threshold, OnsetBasis basis) {
  OnsetResult result;
  double cutoff = threshold * static_cast<double>(band.reference);
  std::optional<int64_t> previous_day;
  for (const auto& snapshot : series) {
    uint64_t value = basis == OnsetBasis::active_hosts ? snapshot.active() : snapshot.total;
    auto day = dates::parse_iso_date(snapshot.date);
    if (!day)
      throw Error("detect_onset: bad date '" + snapshot.date + "'");
    if (previous_day && *day <= *previous_day)
      throw Error("detect_onset: series not date-ordered at " + snapshot.date);
    if (static_cast<double>(value) < cutoff) {
      result.found = true;
      result.date = snapshot.date;
      if (previous_day && *day - *previous_day > 1)
        result.gap = std::make_pair(dates::format_iso_date(*previous_day + 1),
                                    dates::format_iso_date(*day - 1));
      return result;
    }
    previous_day = *day;
  }
  return result;
}

std::vector<AnomalyWindow> detect_inflation(const std::vector<HostSnapshot>& series,
                                            const BaselineBand& band,
                                            const std::vector<HostSnapshot>& control_series,
                                            const BaselineBand& control_band,
                                            double ratio_threshold) {
  if (band.reference == 0)
    throw Error("detect_inflation: baseline reference is zero");
  std::map<std::string, uint64_t> control_totals;
  for (const auto& snapshot : control_series)
    control_totals[snapshot.date] = snapshot.total;

  std::vector<AnomalyWindow> windows;
  std::optional<AnomalyWindow> open;
  for (const auto& snapshot : series) {
    double ratio = static_cast<double>(snapshot.total) / static_cast<double>(band.reference);
    bool control_flat = false;
    if (auto it = control_totals.find(snapshot.date); it != control_totals.end())
      control_flat = it->second >= control_band.low && it->second <= control_band.high;
    bool anomalous = ratio >= ratio_threshold && control_flat;
    if (anomalous) {
      if (!open) {
        open.emplace();
        open->start = snapshot.date;
        open->peak_ratio = 0.0;
      }
      open->end = snapshot.date;
      if (ratio > open->peak_ratio) {
        open->peak_ratio = ratio;
        open->peak_date = snapshot.date;
      }
    } else if (open) {
      windows.push_back(*open);
      open.reset();
    }
  }
  if (open)
    windows.push_back(*open);
  return windows;
}

std::vector<HostSnapshot> read_series_csv(std::istream& in, std::vector<std::string>* warnings) {
  std::vector<HostSnapshot> series;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    if (line_number == 1 && line.rfind("date,", 0) == 0)
      continue; // header
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
      fields.push_back(field);
    while (fields.size() < 4)
      fields.emplace_back();
    HostSnapshot snapshot;
    snapshot.date = fields[0];
    if (!dates::is_valid(snapshot.date))
      throw Error("series line " + std::to_string(line_number) + ": bad date '" + fields[0] + "'");
    auto parse_count = [&](const std::string& text, const char* what) {
      uint64_t value = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error("series line " + std::to_string(line_number) + ": bad " + what + " '" +
                    text + "'");
      return value;
    };
    snapshot.total = parse_count(fields[1], "total");
    if (fields[2].empty()) {
      snapshot.pending = 0;
      if (warnings)
        warnings->push_back("line " + std::to_string(line_number) + " (" + snapshot.date +
                            "): blank pending treated as 0");
    } else {
      snapshot.pending = parse_count(fields[2], "pending");
    }
    if (snapshot.pending > snapshot.total)
      throw Error("series line " + std::to_string(line_number) + ": pending exceeds total");
    snapshot.country = fields[3];
    series.push_back(std::move(snapshot));
  }
  return series;
}

std::vector<HostSnapshot> read_series_csv_file(const std::string& path,
                                               std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open series file: " + path);
  return read_series_csv(in, warnings);
}

void export_event_json(const EventAnalysis& analysis, const BaselineBand& band,
                       std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["baseline"] = {{"low", band.low}, {"high", band.high}, {"reference", band.reference}};
  if (analysis.onset.found) {
    doc["onset_date"] = analysis.onset.date;
    if (analysis.onset.gap)
      doc["onset_gap"] = {{"first_missing", analysis.onset.gap->first},
                          {"last_missing", analysis.onset.gap->second}};
  } else {
    doc["onset_date"] = nullptr;
  }
  doc["floor_date"] = analysis.floor_date;
  doc["floor_active"] = analysis.floor_active;
  auto& reductions = doc["reduction_pp"] = nlohmann::ordered_json::object();
  for (const auto& [date, pp] : analysis.reduction_pp) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", pp);
    reductions[date] = std::stod(buf);
  }
  auto& carryover = doc["carryover_dates"] = nlohmann::ordered_json::array();
  for (const auto& [date, flag] : analysis.carryover_flags)
    if (flag)
      carryover.push_back(date);
  auto& windows = doc["anomaly_windows"] = nlohmann::ordered_json::array();
  for (const auto& window : analysis.anomaly_windows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", window.peak_ratio);
    windows.push_back({{"start", window.start},
                       {"end", window.end},
                       {"peak_ratio", std::stod(buf)},
                       {"peak_date", window.peak_date}});
  }
  out << doc.dump(2) << '\n';
}

void export_series_csv(const std::vector<HostSnapshot>& series, const BaselineBand& band,
                       double carryover_threshold, std::ostream& out) {
  out << "date,total_hosts,active_hosts,pending_pct,reduction_pp,carryover\n";
  for (const auto& snapshot : series) {
    auto decomposition = decompose_pending(snapshot, carryover_threshold);
    char pending_pct[32], reduction_pp[32];
    std::snprintf(pending_pct, sizeof pending_pct, "%.1f",
                  decomposition.pending_fraction * 100.0);
    std::snprintf(reduction_pp, sizeof reduction_pp, "%.1f", reduction(snapshot.active(), band));
    out << snapshot.date << ',' << snapshot.total << ',' << snapshot.active() << ','
        << (decomposition.empty_snapshot ? "" : pending_pct) << ',' << reduction_pp << ','
        << (decomposition.carryover ? 1 : 0) << '\n';
  }
}

} // namespace outagekit::passive
