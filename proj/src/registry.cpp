#include "outagekit/registry.hpp"

#include "outagekit/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

namespace outagekit::registry {

namespace {

std::vector<std::string> split_pipe(const std::string& line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    size_t bar = line.find('|', pos);
    if (bar == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, bar - pos));
    pos = bar + 1;
  }
  return fields;
}

bool parse_u64(const std::string& text, uint64_t& out) {
  if (text.empty())
    return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string to_upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

} // namespace

DelegatedFile parse_delegated(std::istream& in, const std::string& snapshot_date) {
  DelegatedFile result;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    auto fields = split_pipe(line);
    // Version line: "2|ripencc|serial|records|startdate|enddate|UTCoff".
    uint64_t version = 0;
    if (!fields.empty() && parse_u64(fields[0], version))
      continue;
    // Summary line: "ripencc|*|asn|*|count|summary".
    if (fields.size() >= 6 && (fields[1] == "*" || fields[5] == "summary"))
      continue;
    if (fields.size() < 7) {
      result.rejects.push_back({line_number, "expected at least 7 fields", line});
      continue;
    }
    const std::string& kind = fields[2];
    if (kind == "ipv6") {
      ++result.skipped_ipv6;
      continue;
    }
    if (kind != "asn" && kind != "ipv4") {
      result.rejects.push_back({line_number, "unknown resource kind '" + kind + "'", line});
      continue;
    }
    AllocationRecord record;
    record.registry = fields[0];
    record.country = to_upper(fields[1]);
    record.kind = kind == "asn" ? ResourceKind::asn : ResourceKind::ipv4;
    record.status = to_lower(fields[6]);
    record.snapshot_date = snapshot_date;
    uint64_t count = 0;
    if (!parse_u64(fields[4], count) || count < 1) {
      result.rejects.push_back({line_number, "count must be a positive integer", line});
      continue;
    }
    record.count = count;
    if (record.kind == ResourceKind::asn) {
      uint64_t asn = 0;
      if (!parse_u64(fields[3], asn) || asn > 0xffffffffull) {
        result.rejects.push_back({line_number, "bad ASN start", line});
        continue;
      }
      if (asn + count - 1 > 0xffffffffull) {
        result.rejects.push_back({line_number, "ASN range exceeds 32-bit space", line});
        continue;
      }
      record.start = static_cast<uint32_t>(asn);
    } else {
      auto addr = parse_ipv4(fields[3]);
      if (!addr) {
        result.rejects.push_back({line_number, "bad IPv4 start address", line});
        continue;
      }
      if (static_cast<uint64_t>(*addr) + count - 1 > 0xffffffffull) {
        result.rejects.push_back({line_number, "address range overflows past 255.255.255.255", line});
        continue;
      }
      record.start = *addr;
    }
    result.records.push_back(std::move(record));
  }
  return result;
}

DelegatedFile parse_delegated_file(const std::string& path, const std::string& snapshot_date) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open delegated file: " + path);
  return parse_delegated(in, snapshot_date);
}

std::set<Asn> country_asns(const std::vector<AllocationRecord>& records,
                           const std::string& country,
                           const std::set<std::string>& statuses) {
  std::string cc = to_upper(country);
  std::set<Asn> asns;
  for (const auto& record : records) {
    if (record.kind != ResourceKind::asn || record.country != cc || !statuses.count(record.status))
      continue;
    for (uint64_t i = 0; i < record.count; ++i)
      asns.insert(static_cast<Asn>(record.start + i));
  }
  return asns;
}

std::vector<Ipv4Prefix> decompose_interval(uint32_t start, uint64_t count) {
  std::vector<Ipv4Prefix> blocks;
  uint64_t cursor = start;
  uint64_t remaining = count;
  while (remaining > 0) {
    // Largest power of two that is aligned at the cursor and fits.
    uint64_t align = cursor == 0 ? (uint64_t{1} << 32)
                                 : uint64_t{1} << std::countr_zero(static_cast<uint32_t>(cursor));
    uint64_t fit = std::bit_floor(remaining);
    uint64_t block = std::min(align, fit);
    int length = 32 - std::countr_zero(block);
    blocks.emplace_back(static_cast<uint32_t>(cursor), static_cast<uint8_t>(length));
    cursor += block;
    remaining -= block;
  }
  return blocks;
}

std::vector<AllocatedPrefix> country_prefixes(const std::vector<AllocationRecord>& records,
                                              const std::string& country,
                                              const std::set<std::string>& statuses) {
  std::string cc = to_upper(country);
  std::vector<AllocatedPrefix> prefixes;
  for (const auto& record : records) {
    if (record.kind != ResourceKind::ipv4 || record.country != cc || !statuses.count(record.status))
      continue;
    for (const auto& cidr : decompose_interval(record.start, record.count))
      prefixes.push_back({cidr, record});
  }
  std::sort(prefixes.begin(), prefixes.end());
  return prefixes;
}

void export_registry_json(const std::vector<AllocationRecord>& records,
                          const std::string& country,
                          const std::set<std::string>& statuses,
                          const std::string& snapshot_date, std::ostream& out) {
  auto asns = country_asns(records, country, statuses);
  auto prefixes = country_prefixes(records, country, statuses);
  uint64_t ipv4_records = 0;
  for (const auto& record : records)
    if (record.kind == ResourceKind::ipv4 && record.country == to_upper(country) &&
        statuses.count(record.status))
      ++ipv4_records;

  nlohmann::ordered_json doc;
  doc["snapshot_date"] = snapshot_date;
  doc["country"] = to_upper(country);
  doc["statuses"] = statuses;
  doc["asn_count"] = asns.size();
  doc["asns"] = asns;
  doc["ipv4_record_count"] = ipv4_records;
  doc["prefix_count"] = prefixes.size();
  auto& list = doc["prefixes"] = nlohmann::ordered_json::array();
  for (const auto& prefix : prefixes)
    list.push_back(prefix.cidr.to_string());
  out << doc.dump(2) << '\n';
}

} // namespace outagekit::registry
