#include "outagekit/verdicts.hpp"

#include "outagekit/error.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace outagekit::verdicts {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::NULL_ROUTE: return "NULL_ROUTE";
    case Verdict::REACHABLE: return "REACHABLE";
    case Verdict::BGP_WITHDRAW: return "BGP_WITHDRAW";
    case Verdict::FIREWALL_ACL: return "FIREWALL_ACL";
    case Verdict::AMBIGUOUS: return "AMBIGUOUS";
  }
  return "AMBIGUOUS";
}

Verdict verdict_from_string(const std::string& name) {
  for (Verdict v : kAllVerdicts)
    if (to_string(v) == name)
      return v;
  throw Error("unknown verdict: " + name);
}

Verdict classify(OutcomeKind port80, OutcomeKind port443, OutcomeKind port179) {
  using K = OutcomeKind;
  if (port80 == K::TIMEOUT && port443 == K::TIMEOUT && port179 == K::TIMEOUT)
    return Verdict::NULL_ROUTE;
  if (port80 == K::SYN_ACK || port443 == K::SYN_ACK)
    return Verdict::REACHABLE;
  if (port80 == K::ICMP_UNREACHABLE || port443 == K::ICMP_UNREACHABLE ||
      port179 == K::ICMP_UNREACHABLE)
    return Verdict::BGP_WITHDRAW;
  if (port80 == K::TIMEOUT && port443 == K::TIMEOUT && port179 == K::RST)
    return Verdict::FIREWALL_ACL;
  if (port80 == K::RST || port443 == K::RST)
    return Verdict::REACHABLE;
  return Verdict::AMBIGUOUS;
}

uint32_t ConsensusRecord::total_runs() const {
  uint32_t total = 0;
  for (const auto& [verdict, count] : run_verdicts)
    total += count;
  return total;
}

std::pair<Verdict, double> consensus(const std::map<Verdict, uint32_t>& run_verdicts) {
  uint64_t total = 0;
  for (const auto& [verdict, count] : run_verdicts)
    total += count;
  if (total == 0)
    throw Error("consensus: no run verdicts");

  Verdict top = Verdict::AMBIGUOUS;
  uint64_t top_count = 0;
  for (const auto& [verdict, count] : run_verdicts) {
    if (count > top_count) {
      top = verdict;
      top_count = count;
    }
  }
  double top_fraction = static_cast<double>(top_count) / static_cast<double>(total);
  if (top_count * 2 > total)
    return {top, top_fraction};
  return {Verdict::AMBIGUOUS, top_fraction};
}

VerdictDistribution distribution(const std::vector<ConsensusRecord>& records,
                                 const std::string& vantage_id) {
  VerdictDistribution dist;
  dist.vantage_id = vantage_id;
  for (Verdict v : kAllVerdicts) {
    dist.counts[v] = 0;
    dist.fractions[v] = 0.0;
  }
  for (const auto& record : records) {
    if (record.vantage_id != vantage_id)
      throw Error("distribution: record for vantage '" + record.vantage_id +
                  "' mixed into '" + vantage_id + "'");
    ++dist.counts[record.consensus];
    dist.runs = std::max(dist.runs, record.total_runs());
  }
  dist.total = records.size();
  if (dist.total > 0)
    for (Verdict v : kAllVerdicts)
      dist.fractions[v] = static_cast<double>(dist.counts[v]) / static_cast<double>(dist.total);
  return dist;
}

double cross_vantage_spread(const std::vector<VerdictDistribution>& distributions,
                            Verdict verdict) {
  if (distributions.size() < 2)
    throw Error("cross_vantage_spread: need at least two distributions");
  double lo = 1.0, hi = 0.0;
  for (const auto& dist : distributions) {
    double f = dist.fractions.at(verdict);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  return (hi - lo) * 100.0;
}

void export_consensus_csv(const std::vector<ConsensusRecord>& records, std::ostream& out) {
  out << "prefix,vantage,consensus,support,runs\n";
  char support[32];
  for (const auto& record : records) {
    std::snprintf(support, sizeof support, "%.4f", record.support);
    out << record.prefix.to_string() << ',' << record.vantage_id << ','
        << to_string(record.consensus) << ',' << support << ',' << record.total_runs() << '\n';
  }
}

void export_distribution_csv(const std::vector<VerdictDistribution>& distributions,
                             std::ostream& out) {
  out << "vantage,runs,total";
  for (Verdict v : kAllVerdicts)
    out << ',' << to_string(v) << "_count," << to_string(v) << "_pct";
  out << '\n';
  char pct[32];
  for (const auto& dist : distributions) {
    out << dist.vantage_id << ',' << dist.runs << ',' << dist.total;
    for (Verdict v : kAllVerdicts) {
      std::snprintf(pct, sizeof pct, "%.1f", dist.fractions.at(v) * 100.0);
      out << ',' << dist.counts.at(v) << ',' << pct;
    }
    out << '\n';
  }
}

} // namespace outagekit::verdicts
