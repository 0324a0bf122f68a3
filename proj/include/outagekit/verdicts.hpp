#pragma once

#include "outagekit/probe.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace outagekit::verdicts {

using probe::OutcomeKind;

enum class Verdict : uint8_t {
  NULL_ROUTE,
  REACHABLE,
  BGP_WITHDRAW,
  FIREWALL_ACL,
  AMBIGUOUS,
};

constexpr std::array<Verdict, 5> kAllVerdicts = {
    Verdict::NULL_ROUTE, Verdict::REACHABLE, Verdict::BGP_WITHDRAW,
    Verdict::FIREWALL_ACL, Verdict::AMBIGUOUS};

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& name);

/// Classifies one run's port 80/443/179 outcomes. Total over all 64
/// outcome triples; evaluation order resolves conflicting evidence:
///   1. all three time out                      -> NULL_ROUTE
///   2. SYN-ACK on 80 or 443                    -> REACHABLE
///   3. any ICMP unreachable                    -> BGP_WITHDRAW
///   4. 80 and 443 time out, 179 answers RST    -> FIREWALL_ACL
///   5. RST on 80 or 443                        -> REACHABLE
///   6. anything else                           -> AMBIGUOUS
Verdict classify(OutcomeKind port80, OutcomeKind port443, OutcomeKind port179);

struct ConsensusRecord {
  Ipv4Prefix prefix;
  std::string vantage_id;
  std::map<Verdict, uint32_t> run_verdicts; // multiset as counts
  Verdict consensus = Verdict::AMBIGUOUS;
  double support = 0.0;

  uint32_t total_runs() const;
};

/// Majority vote over per-run verdicts: the verdict held by strictly
/// more than half the runs wins; otherwise AMBIGUOUS with the top
/// plurality fraction as support. Errors on an empty multiset.
std::pair<Verdict, double> consensus(const std::map<Verdict, uint32_t>& run_verdicts);

struct VerdictDistribution {
  std::string vantage_id;
  uint32_t runs = 0; // sweeps behind the consensus records
  std::map<Verdict, uint64_t> counts;
  std::map<Verdict, double> fractions;
  uint64_t total = 0;
};

/// Per-verdict counts and fractions over one vantage's consensus records.
/// Errors when records carry mixed vantage ids.
VerdictDistribution distribution(const std::vector<ConsensusRecord>& records,
                                 const std::string& vantage_id);

/// Max minus min fraction of `verdict` across distributions, in
/// percentage points. Requires at least two distributions.
double cross_vantage_spread(const std::vector<VerdictDistribution>& distributions, Verdict verdict);

/// CSV export: prefix,vantage,consensus,support,runs.
void export_consensus_csv(const std::vector<ConsensusRecord>& records, std::ostream& out);

/// Summary CSV with one row per vantage: runs, then count and percent
/// per verdict in NR/RE/BW/FA/AM order.
void export_distribution_csv(const std::vector<VerdictDistribution>& distributions,
                             std::ostream& out);

} // namespace outagekit::verdicts
