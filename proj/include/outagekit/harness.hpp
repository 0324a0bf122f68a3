#pragma once

#include "outagekit/coverage.hpp"
#include "outagekit/mrt.hpp"
#include "outagekit/probe.hpp"
#include "outagekit/verdicts.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace outagekit::harness {

/// Deterministic outcome script for replay probing. Lookups fall back
/// in order: (run, address, port, attempt) -> (address, port, attempt)
/// -> (address, port); anything unscripted times out.
class TransportScript {
public:
  struct Key {
    int32_t run = -1; // -1 matches every run
    uint32_t address = 0;
    uint16_t port = 0;
    int32_t attempt = -1; // -1 matches every attempt

    auto operator<=>(const Key&) const = default;
  };

  void add(const Key& key, const probe::PortOutcome& outcome);
  probe::PortOutcome lookup(uint32_t run, uint32_t address, uint16_t port,
                            uint32_t attempt) const;

  size_t size() const { return entries_.size(); }

  /// Line-delimited JSON: {"address","port","outcome"[,"run","attempt","rtt_ms"]}.
  void write_jsonl(std::ostream& out) const;
  static TransportScript read_jsonl(std::istream& in);
  static TransportScript read_jsonl_file(const std::string& path);

private:
  std::map<Key, probe::PortOutcome> entries_;
};

/// Replay transport over a script, with a virtual clock so repeated
/// runs serialize byte-identically. probe() also appends to a
/// timestamped send log used by rate-conformance tests.
class ReplayTransport : public probe::ProbeTransport {
public:
  explicit ReplayTransport(TransportScript script);

  probe::PortOutcome probe(uint32_t address, uint16_t port, uint32_t run_id, uint32_t attempt,
                           int timeout_ms) override;
  int64_t now_epoch_ms() const override;

  struct SendLogEntry {
    double elapsed_s; // wall-clock seconds since transport construction
    uint32_t address;
    uint16_t port;
  };
  std::vector<SendLogEntry> send_log() const;

private:
  struct State;
  std::shared_ptr<State> state_;
};

/// Planted per-prefix ground truth for end-to-end pipeline tests.
/// Noise replaces floor(noise_rate * runs) of each prefix's runs with a
/// different verdict's canonical triple; keeping the rate below 0.5
/// guarantees majority recovery. AMBIGUOUS plants cycle three canonical
/// triples so no verdict reaches a strict majority; noise skips them.
struct GroundTruthPlan {
  std::map<Ipv4Prefix, verdicts::Verdict> planted;
  double noise_rate = 0.0; // in [0, 0.49]
  uint64_t seed = 0;
};

/// The minimal unambiguous outcome triple (ports 80,443,179) per verdict.
std::array<probe::OutcomeKind, 3> canonical_triple(verdicts::Verdict verdict);

/// One script per run realizing the plan. Errors when noise_rate >= 0.5.
std::vector<TransportScript> script_from_plan(const GroundTruthPlan& plan, uint32_t runs);

/// All per-run scripts merged into one, keyed by run, for replay files.
TransportScript merged_script(const std::vector<TransportScript>& per_run);

struct SynthPeer {
  mrt::Asn asn = 64512;
  bool wide_asn = false; // encode the peer AS in 4 bytes
  bool ipv6 = false;
};

/// Serializes entries as a PEER_INDEX_TABLE plus RIB_IPV4_UNICAST
/// records; consecutive entries for one prefix share a record.
/// parse_bview on the result reproduces the entries exactly.
std::vector<uint8_t> synth_rib(const std::vector<mrt::RouteEntry>& entries,
                               const std::vector<SynthPeer>& peers);
std::vector<uint8_t> synth_rib(const std::vector<mrt::RouteEntry>& entries);

/// Reference coverage semantics: brute-force interval comparison over
/// all (allocated, announced) pairs. Deliberately independent of the
/// trie-backed implementation it checks.
std::set<Ipv4Prefix> coverage_oracle(const std::vector<registry::AllocatedPrefix>& allocated,
                                     const std::set<Ipv4Prefix>& announced);

} // namespace outagekit::harness
