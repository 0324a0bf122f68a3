#pragma once

#include "outagekit/ipv4.hpp"

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace outagekit::mrt {

using Asn = uint32_t;

/// One announced prefix from a RIB dump. `origin` is a singleton unless
/// the AS path terminates in an AS_SET, in which case every member of
/// that set is a potential origin.
struct RouteEntry {
  Ipv4Prefix prefix;
  std::set<Asn> origin;
  std::vector<Asn> path;
  uint32_t peer_index = 0;

  bool operator==(const RouteEntry&) const = default;
};

struct RibSnapshot {
  std::string capture_date; // ISO yyyy-mm-dd, supplied by the caller
  std::vector<RouteEntry> entries;
  uint32_t peer_count = 0;
  uint64_t skipped_records = 0; // non-IPv4-unicast or unknown subtypes

  bool operator==(const RibSnapshot&) const = default;
};

/// Parses an MRT TABLE_DUMP_V2 file. Accepts raw, gzip, or bzip2 input;
/// compression is detected from magic bytes, not the file name.
/// Truncated records raise Error with the byte offset; record types other
/// than RIB_IPV4_UNICAST / PEER_INDEX_TABLE are counted and skipped.
RibSnapshot parse_bview(const std::vector<uint8_t>& data, const std::string& capture_date);
RibSnapshot parse_bview(std::istream& in, const std::string& capture_date);
RibSnapshot parse_bview_file(const std::string& path, const std::string& capture_date);

/// Distinct prefixes whose origin set intersects `asns`. Default routes
/// (0.0.0.0/0) are excluded; they carry no country signal.
std::set<Ipv4Prefix> originated_prefixes(const RibSnapshot& snapshot, const std::set<Asn>& asns);

/// Line-delimited export: "prefix<TAB>origin_asns<TAB>path" with origins
/// comma-joined and the path space-joined, in entry order.
void export_routes(const RibSnapshot& snapshot, std::ostream& out);

} // namespace outagekit::mrt
