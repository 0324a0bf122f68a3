#pragma once

#include "outagekit/harness.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace outagekit::fixtures {

/// One routing-table snapshot date inside a scenario event: how many
/// distinct country-origin prefixes the synthetic RIB announces and how
/// many allocated blocks those announcements cover.
struct BgpDateSpec {
  std::string date;
  std::string event;
  std::string phase;
  uint64_t announced = 0;
  uint64_t covered = 0;
};

struct BgpEventSpec {
  std::string name;
  std::string country;
  std::string delegated_date;
  uint32_t asn_start = 64512;
  uint64_t asn_total = 0;
  uint32_t ipv4_base = 0;
  uint64_t allocated_blocks = 0; // decomposed CIDR count of the universe
  uint64_t seed = 0;
  std::vector<BgpDateSpec> dates;
};

std::vector<BgpEventSpec> load_bgp_scenario(const std::string& path);

struct BgpEventFiles {
  std::string delegated_path;
  std::map<std::string, std::string> bview_paths; // date -> file
};

/// Materializes the delegated-statistics file and one MRT bview per
/// date under `out_dir`. Every other date's bview is gzip-compressed to
/// exercise magic-byte sniffing. Output bytes depend only on the spec.
BgpEventFiles write_bgp_event_fixtures(const BgpEventSpec& spec, const std::string& out_dir);

/// The announced prefix set the generated bview carries for one date
/// (used by tests that bypass the MRT round trip).
std::set<Ipv4Prefix> scenario_announced(const BgpEventSpec& spec, const BgpDateSpec& date);

/// Deterministic synthetic probe target list with mixed prefix lengths.
std::vector<Ipv4Prefix> make_probe_targets(size_t count);
void write_probe_targets(const std::vector<Ipv4Prefix>& targets, const std::string& path);
std::vector<Ipv4Prefix> read_probe_targets(const std::string& path);

/// Ground-truth plan spec: verdict counts are dealt over a seeded
/// shuffle of the target list.
struct PlanSpec {
  std::string vantage;
  uint32_t runs = 0;
  uint64_t seed = 0;
  double noise_rate = 0.0;
  std::string targets_file; // relative to the plan file's directory
  std::map<std::string, uint64_t> verdict_counts;
};

PlanSpec load_plan_spec(const std::string& path);
harness::GroundTruthPlan expand_plan(const PlanSpec& spec,
                                     const std::vector<Ipv4Prefix>& targets);

std::vector<uint8_t> gzip_compress(const std::vector<uint8_t>& data);

} // namespace outagekit::fixtures
