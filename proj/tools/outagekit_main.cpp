// outagekit: characterizes nationwide Internet shutdowns from BGP RIB
// snapshots, active TCP reachability probing, and passive scan series.

#include "outagekit/ascomp.hpp"
#include "outagekit/coverage.hpp"
#include "outagekit/dates.hpp"
#include "outagekit/error.hpp"
#include "outagekit/fixtures.hpp"
#include "outagekit/harness.hpp"
#include "outagekit/manifest.hpp"
#include "outagekit/mrt.hpp"
#include "outagekit/passive.hpp"
#include "outagekit/probe.hpp"
#include "outagekit/registry.hpp"
#include "outagekit/verdicts.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace outagekit;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  json config = json::object();
};

void load_config(GlobalOptions& global) {
  if (global.config_path.empty())
    return;
  std::ifstream in(global.config_path);
  if (!in)
    throw UsageError("cannot open config file: " + global.config_path);
  try {
    global.config = json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError("config file " + global.config_path + ": " + e.what());
  }
}

template <typename T>
T config_or(const GlobalOptions& global, const std::string& key, T fallback) {
  if (global.config.contains(key))
    return global.config.at(key).get<T>();
  return fallback;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write output file: " + path);
  return out;
}

std::string report_header(const manifest::RunManifest& m) {
  return "# outagekit " + std::string(manifest::kToolVersion) + " config_digest=" +
         m.config_digest + "\n";
}

manifest::RunManifest start_manifest(const std::string& subcommand,
                                     std::vector<std::string> inputs,
                                     std::map<std::string, std::string> config) {
  manifest::RunManifest m;
  m.subcommand = subcommand;
  m.input_paths = std::move(inputs);
  m.config = std::move(config);
  m.finalize_digest();
  m.started_at = manifest::utc_timestamp_now();
  return m;
}

void finish_manifest(manifest::RunManifest& m, const std::string& out_dir) {
  m.finished_at = manifest::utc_timestamp_now();
  manifest::write_manifest(m, (fs::path(out_dir) / "manifest.json").string());
}

std::string fmt1(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", value);
  return buf;
}

std::string fmt2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

// ---------------------------------------------------------------- rib

struct RibArgs {
  std::vector<std::string> bviews;
  std::vector<std::string> snapshot_dates;
  std::vector<std::string> labels; // "EVENT:PHASE" per snapshot
  std::string delegated;
  std::string country;
  std::string statuses = "allocated,assigned";
  bool diff = false;
  double withdrawal_pp = coverage::kDefaultWithdrawalThresholdPp;
  std::string dump_routes;
  std::string export_registry;
};

std::set<std::string> parse_statuses(const std::string& csv) {
  std::set<std::string> statuses;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      statuses.insert(item);
  if (statuses.empty())
    throw UsageError("--statuses must name at least one status");
  return statuses;
}

int run_rib(const GlobalOptions& global, RibArgs& args) {
  if (args.bviews.empty())
    throw UsageError("rib: at least one --bview is required");
  if (args.bviews.size() != args.snapshot_dates.size())
    throw UsageError("rib: need exactly one --date per --bview");
  for (const auto& date : args.snapshot_dates)
    if (!dates::is_valid(date))
      throw UsageError("rib: bad --date '" + date + "'");
  if (args.diff && args.bviews.size() != 2)
    throw UsageError("rib: --diff requires exactly two snapshots");
  auto statuses = parse_statuses(args.statuses);

  std::vector<std::string> inputs = args.bviews;
  inputs.push_back(args.delegated);
  auto m = start_manifest("rib", inputs,
                          {{"country", args.country},
                           {"statuses", args.statuses},
                           {"withdrawal_pp", fmt1(args.withdrawal_pp)}});

  auto delegated = registry::parse_delegated_file(args.delegated, args.snapshot_dates.front());
  for (const auto& reject : delegated.rejects)
    std::cerr << "warning: " << args.delegated << ":" << reject.line_number << ": "
              << reject.reason << "\n";
  auto asns = registry::country_asns(delegated.records, args.country, statuses);
  if (asns.empty())
    throw Error("rib: no " + args.country + " ASNs in " + args.delegated);
  auto allocated = registry::country_prefixes(delegated.records, args.country, statuses);

  std::vector<coverage::CoverageRow> rows;
  std::vector<coverage::CoverageResult> results;
  for (size_t i = 0; i < args.bviews.size(); ++i) {
    auto snapshot = mrt::parse_bview_file(args.bviews[i], args.snapshot_dates[i]);
    auto announced = mrt::originated_prefixes(snapshot, asns);
    auto result = coverage::compute_coverage(allocated, announced, args.snapshot_dates[i]);
    coverage::CoverageRow row;
    row.result = result;
    if (i < args.labels.size()) {
      auto colon = args.labels[i].find(':');
      row.event = args.labels[i].substr(0, colon);
      if (colon != std::string::npos)
        row.phase = args.labels[i].substr(colon + 1);
    }
    rows.push_back(row);
    results.push_back(std::move(result));

    if (!args.dump_routes.empty() && i == 0) {
      auto out = open_out(args.dump_routes);
      mrt::export_routes(snapshot, out);
    }
  }

  if (!args.export_registry.empty()) {
    auto out = open_out(args.export_registry);
    registry::export_registry_json(delegated.records, args.country, statuses,
                                   args.snapshot_dates.front(), out);
  }

  {
    auto out = open_out((fs::path(global.out_dir) / "coverage.csv").string());
    out << report_header(m);
    coverage::export_coverage_csv(rows, out);
  }
  {
    ordered_json doc;
    doc["manifest"] = {{"tool_version", m.tool_version}, {"config_digest", m.config_digest}};
    auto& list = doc["snapshots"] = ordered_json::array();
    for (size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      list.push_back({{"date", r.date},
                      {"event", rows[i].event},
                      {"phase", rows[i].phase},
                      {"announced", r.announced_count},
                      {"allocated", r.allocated_count},
                      {"covered", r.covered_count},
                      {"coverage_pct", std::stod(fmt1(r.coverage_fraction * 100.0))}});
    }
    auto out = open_out((fs::path(global.out_dir) / "coverage.json").string());
    out << doc.dump(2) << '\n';
  }

  if (args.diff) {
    auto diff = coverage::diff_coverage(results[0], results[1], args.withdrawal_pp);
    ordered_json doc;
    doc["manifest"] = {{"tool_version", m.tool_version}, {"config_digest", m.config_digest}};
    doc["from_date"] = diff.from_date;
    doc["to_date"] = diff.to_date;
    doc["lost"] = diff.lost.size();
    doc["gained"] = diff.gained.size();
    doc["net_pp"] = std::stod(fmt2(diff.net_pp));
    doc["withdrawal_event"] = diff.withdrawal_event;
    doc["threshold_pp"] = args.withdrawal_pp;
    auto out = open_out((fs::path(global.out_dir) / "withdrawal.json").string());
    out << doc.dump(2) << '\n';
    std::cout << "withdrawal " << diff.from_date << " -> " << diff.to_date << ": net "
              << fmt2(diff.net_pp) << " pp, lost " << diff.lost.size() << ", gained "
              << diff.gained.size() << (diff.withdrawal_event ? " [WITHDRAWAL EVENT]" : "")
              << "\n";
  }

  for (const auto& row : rows)
    std::cout << row.result.date << " announced " << row.result.announced_count << " covered "
              << row.result.covered_count << "/" << row.result.allocated_count << " ("
              << fmt1(row.result.coverage_fraction * 100.0) << "%)\n";

  finish_manifest(m, global.out_dir);
  return 0;
}

// -------------------------------------------------------------- probe

struct ProbeArgs {
  std::string targets;
  std::string ports = "80,443,179";
  int timeout_ms = 3000;
  int retries = 1;
  double rate = 128.0;
  int max_in_flight = 64;
  std::string vantage_id = "local";
  uint32_t run_id = 0;
  uint32_t runs = 1;
  std::string transport = "replay:";
  bool ethics_ack = false;
};

std::vector<uint16_t> parse_ports(const std::string& csv) {
  std::vector<uint16_t> ports;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int value = std::stoi(item);
    if (value < 1 || value > 65535)
      throw UsageError("bad port: " + item);
    ports.push_back(static_cast<uint16_t>(value));
  }
  if (ports.empty())
    throw UsageError("--ports must name at least one port");
  return ports;
}

int run_probe(const GlobalOptions& global, ProbeArgs& args) {
  if (args.rate <= 0)
    throw UsageError("probe: --rate must be positive");
  if (args.runs < 1)
    throw UsageError("probe: --runs must be at least 1");
  auto ports = parse_ports(args.ports);

  bool replay = args.transport.rfind("replay:", 0) == 0;
  if (!replay && args.transport != "real")
    throw UsageError("probe: --transport must be 'real' or 'replay:FILE'");
  if (!replay && !args.ethics_ack)
    throw UsageError(
        "probe: refusing to probe the live network without "
        "--i-understand-scanning-ethics; probing must follow responsible scanning "
        "practice (rate limits, identification, opt-out)");

  auto m = start_manifest("probe", {args.targets},
                          {{"ports", args.ports},
                           {"timeout_ms", std::to_string(args.timeout_ms)},
                           {"retries", std::to_string(args.retries)},
                           {"rate", fmt1(args.rate)},
                           {"max_in_flight", std::to_string(args.max_in_flight)},
                           {"vantage_id", args.vantage_id},
                           {"run_id", std::to_string(args.run_id)},
                           {"runs", std::to_string(args.runs)},
                           {"transport", args.transport}});

  auto prefixes = fixtures::read_probe_targets(args.targets);
  std::vector<probe::ProbeTarget> targets;
  targets.reserve(prefixes.size());
  for (const auto& prefix : prefixes)
    targets.push_back(probe::derive_target(prefix, ports));

  std::unique_ptr<probe::ProbeTransport> transport;
  if (replay) {
    std::string script_path = args.transport.substr(7);
    if (script_path.empty())
      throw UsageError("probe: replay transport needs a script file: replay:FILE");
    transport = std::make_unique<harness::ReplayTransport>(
        harness::TransportScript::read_jsonl_file(script_path));
    m.input_paths.push_back(script_path);
    m.finalize_digest();
  } else {
    transport = std::make_unique<probe::RealTransport>();
  }

  auto out = open_out((fs::path(global.out_dir) / "observations.jsonl").string());
  for (uint32_t run = 0; run < args.runs; ++run) {
    probe::SweepPolicy policy;
    policy.vantage_id = args.vantage_id;
    policy.run_id = args.run_id + run;
    policy.timeout_ms = args.timeout_ms;
    policy.retries = args.retries;
    policy.max_in_flight = args.max_in_flight;
    policy.rate_pps = args.rate;
    auto observations = probe::sweep(targets, *transport, policy);
    probe::write_observations_jsonl(observations, out);
  }
  std::cout << "probed " << targets.size() << " targets x " << args.runs << " run(s) from "
            << args.vantage_id << "\n";
  finish_manifest(m, global.out_dir);
  return 0;
}

// ------------------------------------------------------------ classify

struct ClassifyArgs {
  std::vector<std::string> observation_files;
  bool per_vantage = true;
};

int run_classify(const GlobalOptions& global, ClassifyArgs& args) {
  if (args.observation_files.empty())
    throw UsageError("classify: at least one --observations file is required");

  auto m = start_manifest("classify", args.observation_files,
                          {{"per_vantage", args.per_vantage ? "1" : "0"}});

  std::vector<probe::ProbeObservation> observations;
  for (const auto& path : args.observation_files) {
    std::ifstream in(path);
    if (!in)
      throw Error("cannot open observations file: " + path);
    auto chunk = probe::read_observations_jsonl(in);
    observations.insert(observations.end(), chunk.begin(), chunk.end());
  }
  if (observations.empty())
    throw Error("classify: no observations in input");

  // Port configuration must be uniform across every run.
  std::set<uint16_t> port_set;
  for (const auto& [port, outcome] : observations.front().outcomes)
    port_set.insert(port);
  for (const auto& obs : observations) {
    std::set<uint16_t> this_set;
    for (const auto& [port, outcome] : obs.outcomes)
      this_set.insert(port);
    if (this_set != port_set)
      throw Error("classify: mixed port configurations across runs (prefix " +
                  obs.prefix.to_string() + ", run " + std::to_string(obs.run_id) + ")");
  }
  for (uint16_t port : {80, 443, 179})
    if (!port_set.count(port))
      throw Error("classify: observations lack port " + std::to_string(port));

  std::map<std::pair<std::string, Ipv4Prefix>, std::map<verdicts::Verdict, uint32_t>> grouped;
  for (const auto& obs : observations) {
    auto verdict = verdicts::classify(obs.outcomes.at(80).kind, obs.outcomes.at(443).kind,
                                      obs.outcomes.at(179).kind);
    ++grouped[{obs.vantage_id, obs.prefix}][verdict];
  }

  std::map<std::string, std::vector<verdicts::ConsensusRecord>> by_vantage;
  for (const auto& [key, run_verdicts] : grouped) {
    verdicts::ConsensusRecord record;
    record.vantage_id = key.first;
    record.prefix = key.second;
    record.run_verdicts = run_verdicts;
    auto [verdict, support] = verdicts::consensus(run_verdicts);
    record.consensus = verdict;
    record.support = support;
    by_vantage[key.first].push_back(std::move(record));
  }

  std::vector<verdicts::ConsensusRecord> all_records;
  std::vector<verdicts::VerdictDistribution> distributions;
  for (const auto& [vantage, records] : by_vantage) {
    all_records.insert(all_records.end(), records.begin(), records.end());
    if (args.per_vantage)
      distributions.push_back(verdicts::distribution(records, vantage));
  }
  if (!args.per_vantage) {
    // Pool every vantage into one distribution row.
    std::vector<verdicts::ConsensusRecord> pooled = all_records;
    for (auto& record : pooled)
      record.vantage_id = "all";
    distributions.push_back(verdicts::distribution(pooled, "all"));
  }

  {
    auto out = open_out((fs::path(global.out_dir) / "consensus.csv").string());
    out << report_header(m);
    verdicts::export_consensus_csv(all_records, out);
  }
  {
    auto out = open_out((fs::path(global.out_dir) / "summary.csv").string());
    out << report_header(m);
    verdicts::export_distribution_csv(distributions, out);
  }

  ordered_json spread_doc;
  spread_doc["manifest"] = {{"tool_version", m.tool_version},
                            {"config_digest", m.config_digest}};
  if (distributions.size() >= 2) {
    for (verdicts::Verdict v : verdicts::kAllVerdicts) {
      double pp = verdicts::cross_vantage_spread(distributions, v);
      spread_doc["spread_pp"][verdicts::to_string(v)] = std::stod(fmt2(pp));
      if (v == verdicts::Verdict::NULL_ROUTE)
        std::cout << "NULL_ROUTE cross-vantage spread: " << fmt2(pp) << " pp\n";
    }
  } else {
    spread_doc["spread_pp"] = nullptr;
  }
  {
    auto out = open_out((fs::path(global.out_dir) / "spread.json").string());
    out << spread_doc.dump(2) << '\n';
  }

  std::cout << "classified " << grouped.size() << " (vantage, prefix) pairs across "
            << by_vantage.size() << " vantage(s)\n";
  finish_manifest(m, global.out_dir);
  return 0;
}

// ------------------------------------------------------------- passive

struct PassiveArgs {
  std::string series;
  std::string baseline;
  std::string reference_date;
  std::string control;
  std::string control_baseline;
  std::vector<std::string> key_dates;
  std::string window; // "START:END"
  double onset_threshold = 0.5;
  double carryover_threshold = passive::kDefaultCarryoverThreshold;
  double ratio_threshold = 1.5;
};

int run_passive(const GlobalOptions& global, PassiveArgs& args) {
  if (!dates::is_valid(args.reference_date))
    throw UsageError("passive: bad --reference-date");

  auto m = start_manifest("passive",
                          {args.series, args.baseline},
                          {{"reference_date", args.reference_date},
                           {"onset_threshold", fmt2(args.onset_threshold)},
                           {"carryover_threshold", fmt2(args.carryover_threshold)},
                           {"ratio_threshold", fmt2(args.ratio_threshold)},
                           {"window", args.window}});

  std::vector<std::string> warnings;
  auto series = passive::read_series_csv_file(args.series, &warnings);
  auto baseline_series = passive::read_series_csv_file(args.baseline, &warnings);
  for (const auto& warning : warnings)
    std::cerr << "warning: " << warning << "\n";
  auto band = passive::build_baseline(baseline_series, args.reference_date);

  std::vector<passive::HostSnapshot> window_series = series;
  if (!args.window.empty()) {
    auto colon = args.window.find(':');
    if (colon == std::string::npos)
      throw UsageError("passive: --window must be START:END");
    std::string start = args.window.substr(0, colon), end = args.window.substr(colon + 1);
    window_series.clear();
    for (const auto& snapshot : series)
      if (snapshot.date >= start && snapshot.date <= end)
        window_series.push_back(snapshot);
    if (window_series.empty())
      throw Error("passive: no series rows inside window " + args.window);
  }

  passive::EventAnalysis analysis;
  analysis.onset = passive::detect_onset(window_series, band, args.onset_threshold);

  bool have_floor = false;
  for (const auto& snapshot : window_series) {
    if (analysis.onset.found && snapshot.date < analysis.onset.date)
      continue;
    if (!have_floor || snapshot.active() < analysis.floor_active) {
      analysis.floor_active = snapshot.active();
      analysis.floor_date = snapshot.date;
      have_floor = true;
    }
  }

  std::map<std::string, const passive::HostSnapshot*> by_date;
  for (const auto& snapshot : series)
    by_date[snapshot.date] = &snapshot;
  auto add_key_date = [&](const std::string& date) {
    auto it = by_date.find(date);
    if (it == by_date.end())
      throw Error("passive: key date " + date + " absent from series");
    analysis.reduction_pp[date] = passive::reduction(it->second->active(), band);
  };
  for (const auto& date : args.key_dates)
    add_key_date(date);
  if (analysis.onset.found && !analysis.reduction_pp.count(analysis.onset.date))
    add_key_date(analysis.onset.date);
  if (have_floor && !analysis.reduction_pp.count(analysis.floor_date))
    add_key_date(analysis.floor_date);

  for (const auto& snapshot : window_series)
    analysis.carryover_flags[snapshot.date] =
        passive::decompose_pending(snapshot, args.carryover_threshold).carryover;

  if (!args.control.empty() && !args.control_baseline.empty()) {
    auto control_series = passive::read_series_csv_file(args.control, &warnings);
    auto control_monthly = passive::read_series_csv_file(args.control_baseline, &warnings);
    if (control_monthly.size() < 3)
      throw Error("passive: control baseline needs at least 3 snapshots");
    passive::BaselineBand control_band;
    control_band.low = control_band.high = control_monthly.front().total;
    for (const auto& snapshot : control_monthly) {
      control_band.low = std::min(control_band.low, snapshot.total);
      control_band.high = std::max(control_band.high, snapshot.total);
      control_band.source_dates.push_back(snapshot.date);
    }
    control_band.reference = control_monthly.back().total;
    analysis.anomaly_windows = passive::detect_inflation(series, band, control_series,
                                                         control_band, args.ratio_threshold);
    m.input_paths.push_back(args.control);
    m.input_paths.push_back(args.control_baseline);
    m.finalize_digest();
  } else {
    std::cerr << "warning: no control series given; inflation detection skipped\n";
  }

  {
    auto out = open_out((fs::path(global.out_dir) / "analysis.json").string());
    ordered_json doc;
    doc["manifest"] = {{"tool_version", m.tool_version}, {"config_digest", m.config_digest}};
    std::ostringstream body;
    passive::export_event_json(analysis, band, body);
    doc.update(ordered_json::parse(body.str()), true);
    out << doc.dump(2) << '\n';
  }
  {
    auto out = open_out((fs::path(global.out_dir) / "table1.csv").string());
    out << report_header(m);
    passive::export_series_csv(window_series, band, args.carryover_threshold, out);
  }

  if (analysis.onset.found) {
    std::cout << "onset " << analysis.onset.date;
    if (analysis.onset.gap)
      std::cout << " (gap " << analysis.onset.gap->first << ".." << analysis.onset.gap->second
                << ")";
    std::cout << "\n";
  } else {
    std::cout << "no onset detected\n";
  }
  for (const auto& window : analysis.anomaly_windows)
    std::cout << "anomaly window " << window.start << ".." << window.end << " peak "
              << fmt2(window.peak_ratio) << "x on " << window.peak_date << "\n";

  finish_manifest(m, global.out_dir);
  return 0;
}

// -------------------------------------------------------------- ascomp

struct AscompArgs {
  std::string counts;
  std::string metadata;
  std::string rules;
  std::string overrides;
  std::string baseline_date;
  std::string event_dates; // comma separated
  std::string floor_date;
  std::string recovery_date;
  double exemption_threshold = ascomp::kDefaultExemptionThreshold;
};

int run_ascomp(const GlobalOptions& global, AscompArgs& args) {
  auto m = start_manifest("ascomp",
                          {args.counts, args.metadata, args.rules, args.overrides},
                          {{"baseline_date", args.baseline_date},
                           {"event_dates", args.event_dates},
                           {"floor_date", args.floor_date},
                           {"recovery_date", args.recovery_date},
                           {"exemption_threshold", fmt2(args.exemption_threshold)}});

  auto counts = ascomp::read_counts_csv_file(args.counts);
  auto metadata = ascomp::read_metadata_csv_file(args.metadata);
  auto rules = args.rules.empty() ? std::vector<ascomp::KeywordRule>{}
                                  : ascomp::read_rules_json_file(args.rules);
  auto overrides = args.overrides.empty() ? std::map<ascomp::Asn, ascomp::Category>{}
                                          : ascomp::read_overrides_json_file(args.overrides);
  auto records = ascomp::build_records(counts, metadata, rules, overrides);

  auto cells = ascomp::composition(counts, records);
  {
    auto out = open_out((fs::path(global.out_dir) / "composition.csv").string());
    out << report_header(m);
    ascomp::export_composition_csv(cells, out);
  }

  std::vector<std::string> event_dates;
  {
    std::stringstream ss(args.event_dates);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty())
        event_dates.push_back(item);
  }
  std::vector<ascomp::Asn> skipped;
  auto findings = ascomp::exemptions(counts, args.baseline_date, event_dates,
                                     args.exemption_threshold, &skipped);
  for (ascomp::Asn asn : skipped)
    std::cerr << "warning: AS" << asn << " skipped (zero baseline count)\n";

  auto attribution =
      ascomp::recovery_attribution(counts, args.floor_date, args.recovery_date, records);

  {
    auto out = open_out((fs::path(global.out_dir) / "findings.json").string());
    ordered_json doc;
    doc["manifest"] = {{"tool_version", m.tool_version}, {"config_digest", m.config_digest}};
    std::ostringstream body;
    ascomp::export_findings_json(findings, attribution, args.exemption_threshold, body);
    doc.update(ordered_json::parse(body.str()), true);
    out << doc.dump(2) << '\n';
  }

  for (const auto& finding : findings)
    if (finding.exempt)
      std::cout << "exempt: AS" << finding.asn << " retention "
                << fmt1(finding.retention * 100.0) << "%\n";
  for (const auto& cd : attribution.categories)
    if (cd.anti_correlated)
      std::cout << "anti-correlated: " << ascomp::to_string(cd.category) << " ("
                << cd.delta << ")\n";

  finish_manifest(m, global.out_dir);
  return 0;
}

// -------------------------------------------------------------- report

int run_report(const GlobalOptions& global, const std::string& in_dir) {
  auto m = start_manifest("report", {in_dir}, {});
  ordered_json doc;
  doc["manifest"] = {{"tool_version", m.tool_version}, {"config_digest", m.config_digest}};
  std::ostringstream md;
  md << "# outagekit report\n\n";

  auto slurp_json = [](const fs::path& path) -> std::optional<json> {
    std::ifstream in(path);
    if (!in)
      return std::nullopt;
    try {
      return json::parse(in);
    } catch (...) {
      return std::nullopt;
    }
  };
  auto slurp_text = [](const fs::path& path) -> std::optional<std::string> {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  if (auto coverage_doc = slurp_json(fs::path(in_dir) / "coverage.json")) {
    doc["bgp_coverage"] = (*coverage_doc)["snapshots"];
    md << "## BGP coverage\n\n";
    for (const auto& row : (*coverage_doc)["snapshots"])
      md << "- " << row["date"].get<std::string>() << ": " << row["coverage_pct"].dump()
         << "% (" << row["covered"].dump() << "/" << row["allocated"].dump() << " allocated, "
         << row["announced"].dump() << " announced)\n";
    md << "\n";
  }
  if (auto withdrawal_doc = slurp_json(fs::path(in_dir) / "withdrawal.json")) {
    doc["withdrawal"] = *withdrawal_doc;
    doc["withdrawal"].erase("manifest");
    md << "## Withdrawal diff\n\n- " << (*withdrawal_doc)["from_date"].get<std::string>()
       << " -> " << (*withdrawal_doc)["to_date"].get<std::string>() << ": "
       << (*withdrawal_doc)["net_pp"].dump() << " pp"
       << ((*withdrawal_doc)["withdrawal_event"].get<bool>() ? " (withdrawal event)" : "")
       << "\n\n";
  }
  if (auto summary_text = slurp_text(fs::path(in_dir) / "summary.csv")) {
    md << "## Verdict distribution\n\n```\n" << *summary_text << "```\n\n";
    doc["verdict_summary_csv"] = *summary_text;
  }
  if (auto spread_doc = slurp_json(fs::path(in_dir) / "spread.json")) {
    doc["spread_pp"] = (*spread_doc)["spread_pp"];
    if ((*spread_doc)["spread_pp"].is_object())
      md << "NULL_ROUTE cross-vantage spread: "
         << (*spread_doc)["spread_pp"]["NULL_ROUTE"].dump() << " pp\n\n";
  }
  if (auto analysis_doc = slurp_json(fs::path(in_dir) / "analysis.json")) {
    doc["passive"] = *analysis_doc;
    doc["passive"].erase("manifest");
    md << "## Passive scan analysis\n\n";
    if (!(*analysis_doc)["onset_date"].is_null())
      md << "- onset: " << (*analysis_doc)["onset_date"].get<std::string>() << "\n";
    md << "- floor: " << (*analysis_doc)["floor_date"].get<std::string>() << " ("
       << (*analysis_doc)["floor_active"].dump() << " active hosts)\n\n";
  }
  if (auto findings_doc = slurp_json(fs::path(in_dir) / "findings.json")) {
    doc["as_findings"] = *findings_doc;
    doc["as_findings"].erase("manifest");
    md << "## AS-level findings\n\n";
    for (const auto& finding : (*findings_doc)["exemptions"])
      if (finding["exempt"].get<bool>())
        md << "- exempt AS" << finding["asn"].dump() << " (retention "
           << finding["retention"].dump() << ")\n";
    md << "\n";
  }

  {
    auto out = open_out((fs::path(global.out_dir) / "report.json").string());
    out << doc.dump(2) << '\n';
  }
  {
    auto out = open_out((fs::path(global.out_dir) / "report.md").string());
    out << md.str();
  }
  finish_manifest(m, global.out_dir);
  std::cout << "report written to " << global.out_dir << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"outagekit: multi-plane Internet shutdown measurement toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "JSON file with policy defaults");
  app.add_option("--out", global.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", global.format, "primary report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  RibArgs rib_args;
  auto* rib = app.add_subcommand("rib", "BGP coverage of allocated country prefixes");
  rib->add_option("--bview", rib_args.bviews, "MRT bview file (repeatable)");
  rib->add_option("--date", rib_args.snapshot_dates, "capture date per bview (yyyy-mm-dd)");
  rib->add_option("--label", rib_args.labels, "EVENT:PHASE label per bview");
  rib->add_option("--delegated", rib_args.delegated, "delegated-extended statistics file")
      ->required();
  rib->add_option("--country", rib_args.country, "ISO country code")->required();
  rib->add_option("--statuses", rib_args.statuses, "statuses counted as allocated")
      ->capture_default_str();
  rib->add_flag("--diff", rib_args.diff, "emit a withdrawal diff of two snapshots");
  rib->add_option("--withdrawal-pp", rib_args.withdrawal_pp,
                  "withdrawal flag threshold in percentage points")
      ->capture_default_str();
  rib->add_option("--dump-routes", rib_args.dump_routes,
                  "write prefix/origin/path lines for the first snapshot");
  rib->add_option("--export-registry", rib_args.export_registry,
                  "write the country ASN/prefix sets as JSON");

  ProbeArgs probe_args;
  auto* probe_cmd = app.add_subcommand("probe", "TCP reachability sweep over a prefix list");
  probe_cmd->add_option("--targets", probe_args.targets, "file with one prefix per line")
      ->required();
  probe_cmd->add_option("--ports", probe_args.ports, "comma-separated ports")
      ->capture_default_str();
  probe_cmd->add_option("--timeout-ms", probe_args.timeout_ms, "per-probe timeout")
      ->capture_default_str();
  probe_cmd->add_option("--retries", probe_args.retries, "retries after a timeout")
      ->capture_default_str();
  probe_cmd->add_option("--rate", probe_args.rate, "probes-per-second cap")
      ->capture_default_str();
  probe_cmd->add_option("--max-inflight", probe_args.max_in_flight, "concurrent probe limit")
      ->capture_default_str();
  probe_cmd->add_option("--vantage-id", probe_args.vantage_id, "vantage label")
      ->capture_default_str();
  probe_cmd->add_option("--run-id", probe_args.run_id, "first run id")->capture_default_str();
  probe_cmd->add_option("--runs", probe_args.runs, "number of sweeps")->capture_default_str();
  probe_cmd->add_option("--transport", probe_args.transport, "'real' or 'replay:FILE'")
      ->capture_default_str();
  probe_cmd->add_flag("--i-understand-scanning-ethics", probe_args.ethics_ack,
                      "acknowledge responsible scanning practice for the real transport");

  ClassifyArgs classify_args;
  auto* classify_cmd =
      app.add_subcommand("classify", "verdicts, consensus and per-vantage distributions");
  classify_cmd
      ->add_option("--observations", classify_args.observation_files,
                   "observations JSONL (repeatable)")
      ->required();
  classify_cmd->add_flag("--per-vantage,!--pooled", classify_args.per_vantage,
                         "summarize per vantage (default) or pooled");

  PassiveArgs passive_args;
  auto* passive_cmd = app.add_subcommand("passive", "scan time-series analytics");
  passive_cmd->add_option("--series", passive_args.series, "daily series CSV")->required();
  passive_cmd->add_option("--baseline", passive_args.baseline, "baseline snapshots CSV")
      ->required();
  passive_cmd->add_option("--reference-date", passive_args.reference_date,
                          "baseline reference date")
      ->required();
  passive_cmd->add_option("--control", passive_args.control, "control-country series CSV");
  passive_cmd->add_option("--control-baseline", passive_args.control_baseline,
                          "control-country baseline CSV");
  passive_cmd->add_option("--key-date", passive_args.key_dates,
                          "report the reduction at this date (repeatable)");
  passive_cmd->add_option("--window", passive_args.window, "analysis window START:END");
  passive_cmd->add_option("--onset-threshold", passive_args.onset_threshold,
                          "onset threshold as a fraction of the reference")
      ->capture_default_str();
  passive_cmd->add_option("--carryover-threshold", passive_args.carryover_threshold,
                          "pending fraction that marks carry-over")
      ->capture_default_str();
  passive_cmd->add_option("--ratio-threshold", passive_args.ratio_threshold,
                          "inflation ratio threshold")
      ->capture_default_str();

  AscompArgs ascomp_args;
  auto* ascomp_cmd = app.add_subcommand("ascomp", "AS-category composition and findings");
  ascomp_cmd->add_option("--counts", ascomp_args.counts, "per-AS counts CSV")->required();
  ascomp_cmd->add_option("--metadata", ascomp_args.metadata, "AS metadata CSV")->required();
  ascomp_cmd->add_option("--rules", ascomp_args.rules, "keyword rules JSON");
  ascomp_cmd->add_option("--overrides", ascomp_args.overrides, "manual overrides JSON");
  ascomp_cmd->add_option("--baseline-date", ascomp_args.baseline_date,
                         "exemption baseline date")
      ->required();
  ascomp_cmd->add_option("--event-dates", ascomp_args.event_dates,
                         "comma-separated event dates for exemption checks")
      ->required();
  ascomp_cmd->add_option("--floor-date", ascomp_args.floor_date, "attribution floor date")
      ->required();
  ascomp_cmd->add_option("--recovery-date", ascomp_args.recovery_date,
                         "attribution recovery date")
      ->required();
  ascomp_cmd->add_option("--exemption-threshold", ascomp_args.exemption_threshold,
                         "retention required on every event date")
      ->capture_default_str();

  std::string report_in_dir;
  auto* report_cmd = app.add_subcommand("report", "combine subcommand outputs into one report");
  report_cmd->add_option("--in", report_in_dir, "directory with subcommand outputs")
      ->required();

  try {
    app.parse(argc, argv);
    load_config(global);
    fs::create_directories(global.out_dir);

    // Config file values back-fill options the command line left alone.
    if (rib->parsed()) {
      if (!rib->count("--withdrawal-pp"))
        rib_args.withdrawal_pp =
            config_or(global, "withdrawal_pp", rib_args.withdrawal_pp);
      if (!rib->count("--statuses") && global.config.contains("statuses")) {
        auto list = global.config.at("statuses").get<std::vector<std::string>>();
        std::string joined;
        for (const auto& status : list)
          joined += (joined.empty() ? "" : ",") + status;
        rib_args.statuses = joined;
      }
      return run_rib(global, rib_args);
    }
    if (probe_cmd->parsed()) {
      if (!probe_cmd->count("--timeout-ms"))
        probe_args.timeout_ms = config_or(global, "timeout_ms", probe_args.timeout_ms);
      if (!probe_cmd->count("--retries"))
        probe_args.retries = config_or(global, "retries", probe_args.retries);
      if (!probe_cmd->count("--rate"))
        probe_args.rate = config_or(global, "rate_pps", probe_args.rate);
      if (!probe_cmd->count("--max-inflight"))
        probe_args.max_in_flight = config_or(global, "max_in_flight", probe_args.max_in_flight);
      return run_probe(global, probe_args);
    }
    if (classify_cmd->parsed())
      return run_classify(global, classify_args);
    if (passive_cmd->parsed()) {
      if (!passive_cmd->count("--onset-threshold"))
        passive_args.onset_threshold =
            config_or(global, "onset_threshold", passive_args.onset_threshold);
      if (!passive_cmd->count("--carryover-threshold"))
        passive_args.carryover_threshold =
            config_or(global, "carryover_threshold", passive_args.carryover_threshold);
      if (!passive_cmd->count("--ratio-threshold"))
        passive_args.ratio_threshold =
            config_or(global, "ratio_threshold", passive_args.ratio_threshold);
      return run_passive(global, passive_args);
    }
    if (ascomp_cmd->parsed()) {
      if (!ascomp_cmd->count("--exemption-threshold"))
        ascomp_args.exemption_threshold =
            config_or(global, "exemption_threshold", ascomp_args.exemption_threshold);
      return run_ascomp(global, ascomp_args);
    }
    if (report_cmd->parsed())
      return run_report(global, report_in_dir);
    throw UsageError("no subcommand given");
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
