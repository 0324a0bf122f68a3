#pragma once

#include "outagekit/ipv4.hpp"
#include "outagekit/registry.hpp"

#include <iosfwd>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace outagekit::coverage {

using registry::AllocatedPrefix;

/// Binary trie over announced prefixes. A query walks the allocated
/// prefix's bit path: any terminal met on the way is an equal or
/// aggregate announcement, and a non-empty subtree at the end means a
/// more-specific exists. Immutable after build; safe for parallel reads.
class PrefixTrie {
public:
  PrefixTrie() = default;
  explicit PrefixTrie(const std::set<Ipv4Prefix>& prefixes);

  /// True iff some inserted prefix equals, contains, or is contained in `p`.
  bool covers(const Ipv4Prefix& p) const;

private:
  struct Node {
    int32_t child[2] = {-1, -1};
    uint32_t subtree_terminals = 0;
    bool terminal = false;
  };
  std::vector<Node> nodes_;
};

struct CoverageResult {
  std::string date;
  uint64_t announced_count = 0;
  uint64_t allocated_count = 0;
  uint64_t covered_count = 0;
  double coverage_fraction = 0.0;
  std::vector<AllocatedPrefix> covered_set;
  std::vector<AllocatedPrefix> uncovered_set;
};

struct WithdrawalDiff {
  std::string from_date;
  std::string to_date;
  std::vector<AllocatedPrefix> lost;   // covered before, uncovered after
  std::vector<AllocatedPrefix> gained; // uncovered before, covered after
  double net_pp = 0.0;                 // signed percentage points
  bool withdrawal_event = false;
};

constexpr double kDefaultWithdrawalThresholdPp = 5.0;

/// An allocated prefix is covered iff at least one announcement equals
/// it, is a more-specific inside it, or is an aggregate containing it.
/// Throws when `allocated` is empty (the fraction would be undefined).
CoverageResult compute_coverage(const std::vector<AllocatedPrefix>& allocated,
                                const std::set<Ipv4Prefix>& announced,
                                const std::string& date);

/// Requires the same allocated universe on both sides; flags a
/// withdrawal event when coverage fell by at least `threshold_pp`.
WithdrawalDiff diff_coverage(const CoverageResult& before, const CoverageResult& after,
                             double threshold_pp = kDefaultWithdrawalThresholdPp);

struct CoverageRow {
  std::string event;
  std::string phase;
  CoverageResult result;
};

/// CSV export with columns date,event,phase,announced,covered,coverage_pct.
void export_coverage_csv(const std::vector<CoverageRow>& rows, std::ostream& out);

} // namespace outagekit::coverage
