#pragma once

#include "outagekit/ipv4.hpp"
#include "outagekit/mrt.hpp"

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace outagekit::registry {

using Asn = mrt::Asn;

enum class ResourceKind { asn, ipv4 };

/// One delegated-statistics line: a run of `count` consecutive ASNs or
/// IPv4 addresses assigned to `country`.
struct AllocationRecord {
  std::string registry;
  std::string country; // ISO-3166 alpha-2, upper case
  ResourceKind kind = ResourceKind::asn;
  uint32_t start = 0; // ASN number or first IPv4 address
  uint64_t count = 0;
  std::string status;
  std::string snapshot_date;

  bool operator==(const AllocationRecord&) const = default;
};

struct RejectedLine {
  size_t line_number = 0;
  std::string reason;
  std::string text;
};

struct DelegatedFile {
  std::vector<AllocationRecord> records;
  std::vector<RejectedLine> rejects;
  uint64_t skipped_ipv6 = 0;
};

/// A CIDR produced by decomposing one allocation interval.
struct AllocatedPrefix {
  Ipv4Prefix cidr;
  AllocationRecord source;

  bool operator==(const AllocatedPrefix& o) const { return cidr == o.cidr; }
  auto operator<=>(const AllocatedPrefix& o) const { return cidr <=> o.cidr; }
};

/// Parses pipe-separated delegated-extended statistics. Version, summary
/// and comment lines are skipped; ipv6 records are counted and dropped;
/// malformed lines land in the reject list and parsing continues.
DelegatedFile parse_delegated(std::istream& in, const std::string& snapshot_date);
DelegatedFile parse_delegated_file(const std::string& path, const std::string& snapshot_date);

inline const std::set<std::string>& default_statuses() {
  static const std::set<std::string> statuses{"allocated", "assigned"};
  return statuses;
}

/// ASNs delegated to `country` with a matching status, expanded over the
/// record counts (a record with count k yields k consecutive ASNs).
std::set<Asn> country_asns(const std::vector<AllocationRecord>& records,
                           const std::string& country,
                           const std::set<std::string>& statuses = default_statuses());

/// Greedy largest-aligned-block decomposition of [start, start+count)
/// into the minimal CIDR set.
std::vector<Ipv4Prefix> decompose_interval(uint32_t start, uint64_t count);

/// All matching ipv4 records decomposed into aligned CIDRs, sorted by
/// block. The result's size is the "allocated prefix" denominator used
/// by the coverage module.
std::vector<AllocatedPrefix> country_prefixes(const std::vector<AllocationRecord>& records,
                                              const std::string& country,
                                              const std::set<std::string>& statuses = default_statuses());

/// JSON export of the ASN set and the decomposed CIDR set. Reports both
/// the raw record count and the decomposed prefix count, since delegated
/// records are intervals rather than CIDRs.
void export_registry_json(const std::vector<AllocationRecord>& records,
                          const std::string& country,
                          const std::set<std::string>& statuses,
                          const std::string& snapshot_date, std::ostream& out);

} // namespace outagekit::registry
