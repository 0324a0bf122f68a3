#include "outagekit/coverage.hpp"

#include "outagekit/error.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace outagekit::coverage {

PrefixTrie::PrefixTrie(const std::set<Ipv4Prefix>& prefixes) {
  nodes_.emplace_back();
  for (const auto& prefix : prefixes) {
    int32_t node = 0;
    ++nodes_[0].subtree_terminals;
    for (uint8_t depth = 0; depth < prefix.length; ++depth) {
      int bit = (prefix.addr >> (31 - depth)) & 1;
      if (nodes_[node].child[bit] < 0) {
        nodes_[node].child[bit] = static_cast<int32_t>(nodes_.size());
        nodes_.emplace_back();
      }
      node = nodes_[node].child[bit];
      ++nodes_[node].subtree_terminals;
    }
    nodes_[node].terminal = true;
  }
}

bool PrefixTrie::covers(const Ipv4Prefix& p) const {
  if (nodes_.empty())
    return false;
  int32_t node = 0;
  for (uint8_t depth = 0; depth < p.length; ++depth) {
    if (nodes_[node].terminal)
      return true; // aggregate announcement above p
    int bit = (p.addr >> (31 - depth)) & 1;
    node = nodes_[node].child[bit];
    if (node < 0)
      return false;
  }
  // Exact match or any more-specific below.
  return nodes_[node].subtree_terminals > 0;
}

CoverageResult compute_coverage(const std::vector<AllocatedPrefix>& allocated,
                                const std::set<Ipv4Prefix>& announced,
                                const std::string& date) {
  if (allocated.empty())
    throw Error("compute_coverage: allocated prefix set is empty; coverage fraction undefined");

  PrefixTrie trie(announced);
  CoverageResult result;
  result.date = date;
  result.announced_count = announced.size();
  result.allocated_count = allocated.size();
  for (const auto& prefix : allocated) {
    if (trie.covers(prefix.cidr))
      result.covered_set.push_back(prefix);
    else
      result.uncovered_set.push_back(prefix);
  }
  result.covered_count = result.covered_set.size();
  result.coverage_fraction =
      static_cast<double>(result.covered_count) / static_cast<double>(result.allocated_count);
  return result;
}

namespace {

std::vector<AllocatedPrefix> sorted_intersection(const std::vector<AllocatedPrefix>& a,
                                                 const std::vector<AllocatedPrefix>& b) {
  std::vector<AllocatedPrefix> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

} // namespace

WithdrawalDiff diff_coverage(const CoverageResult& before, const CoverageResult& after,
                             double threshold_pp) {
  auto universe = [](const CoverageResult& r) {
    std::vector<AllocatedPrefix> u;
    u.reserve(r.covered_set.size() + r.uncovered_set.size());
    std::merge(r.covered_set.begin(), r.covered_set.end(), r.uncovered_set.begin(),
               r.uncovered_set.end(), std::back_inserter(u));
    return u;
  };
  auto before_universe = universe(before);
  auto after_universe = universe(after);
  if (before_universe != after_universe) {
    std::vector<AllocatedPrefix> sym;
    std::set_symmetric_difference(before_universe.begin(), before_universe.end(),
                                  after_universe.begin(), after_universe.end(),
                                  std::back_inserter(sym));
    throw Error("diff_coverage: allocated universes differ between " + before.date + " and " +
                after.date + " (symmetric difference has " + std::to_string(sym.size()) +
                " prefixes)");
  }

  WithdrawalDiff diff;
  diff.from_date = before.date;
  diff.to_date = after.date;
  diff.lost = sorted_intersection(before.covered_set, after.uncovered_set);
  diff.gained = sorted_intersection(before.uncovered_set, after.covered_set);
  diff.net_pp = (after.coverage_fraction - before.coverage_fraction) * 100.0;
  diff.withdrawal_event = diff.net_pp <= -threshold_pp;
  return diff;
}

void export_coverage_csv(const std::vector<CoverageRow>& rows, std::ostream& out) {
  out << "date,event,phase,announced,covered,coverage_pct\n";
  char pct[32];
  for (const auto& row : rows) {
    std::snprintf(pct, sizeof pct, "%.1f", row.result.coverage_fraction * 100.0);
    out << row.result.date << ',' << row.event << ',' << row.phase << ','
        << row.result.announced_count << ',' << row.result.covered_count << ',' << pct << '\n';
  }
}

} // namespace outagekit::coverage
