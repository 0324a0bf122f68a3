#include "outagekit/mrt.hpp"

#include "outagekit/decompress.hpp"
#include "outagekit/error.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace outagekit::mrt {

namespace {

constexpr uint16_t kTypeTableDumpV2 = 13;
constexpr uint16_t kSubtypePeerIndexTable = 1;
constexpr uint16_t kSubtypeRibIpv4Unicast = 2;

constexpr uint8_t kAttrAsPath = 2;
constexpr uint8_t kSegmentAsSet = 1;

// Bounds-checked big-endian reader over one record (or the whole file).
// `base` is the absolute offset of the slice start, used in error text.
class ByteReader {
public:
  ByteReader(const uint8_t* data, size_t size, size_t base)
      : data_(data), size_(size), base_(base) {}

  size_t remaining() const { return size_ - pos_; }
  size_t offset() const { return base_ + pos_; }

  uint8_t u8() { return take(1)[0]; }

  uint16_t u16() {
    const uint8_t* p = take(2);
    return static_cast<uint16_t>(p[0] << 8 | p[1]);
  }

  uint32_t u32() {
    const uint8_t* p = take(4);
    return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
           static_cast<uint32_t>(p[2]) << 8 | static_cast<uint32_t>(p[3]);
  }

  const uint8_t* take(size_t n) {
    if (n > remaining())
      throw Error("truncated MRT record at byte offset " + std::to_string(offset()) +
                  " (need " + std::to_string(n) + " bytes, have " +
                  std::to_string(remaining()) + ")");
    const uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  void skip(size_t n) { take(n); }

private:
  const uint8_t* data_;
  size_t size_;
  size_t base_;
  size_t pos_ = 0;
};

uint32_t parse_peer_index_table(ByteReader r) {
  r.skip(4); // collector BGP id
  uint16_t view_len = r.u16();
  r.skip(view_len);
  uint16_t peer_count = r.u16();
  for (uint16_t i = 0; i < peer_count; ++i) {
    uint8_t peer_type = r.u8();
    r.skip(4);                                // peer BGP id
    r.skip(peer_type & 0x01 ? 16 : 4);        // peer address, v6 or v4
    r.skip(peer_type & 0x02 ? 4 : 2);         // peer AS, 4- or 2-byte
  }
  return peer_count;
}

// AS_PATH segments inside TABLE_DUMP_V2 RIB entries always carry 4-byte
// ASNs (the collector rewrites 2-byte paths on capture).
void parse_as_path(ByteReader r, std::vector<Asn>& path, std::set<Asn>& origin) {
  uint8_t last_segment_type = 0;
  size_t last_segment_start = 0;
  while (r.remaining() > 0) {
    uint8_t seg_type = r.u8();
    uint8_t seg_len = r.u8();
    last_segment_type = seg_type;
    last_segment_start = path.size();
    for (uint8_t i = 0; i < seg_len; ++i)
      path.push_back(r.u32());
  }
  origin.clear();
  if (path.empty())
    return;
  if (last_segment_type == kSegmentAsSet) {
    origin.insert(path.begin() + static_cast<ptrdiff_t>(last_segment_start), path.end());
  } else {
    origin.insert(path.back());
  }
}

void parse_rib_ipv4_unicast(ByteReader r, std::vector<RouteEntry>& out) {
  r.skip(4); // sequence number
  uint8_t plen = r.u8();
  if (plen > 32)
    throw Error("invalid IPv4 prefix length " + std::to_string(plen) +
                " at byte offset " + std::to_string(r.offset() - 1));
  uint32_t addr = 0;
  size_t nbytes = (plen + 7) / 8;
  const uint8_t* p = r.take(nbytes);
  for (size_t i = 0; i < nbytes; ++i)
    addr |= static_cast<uint32_t>(p[i]) << (24 - 8 * i);
  Ipv4Prefix prefix{addr, plen};

  uint16_t entry_count = r.u16();
  for (uint16_t i = 0; i < entry_count; ++i) {
    RouteEntry entry;
    entry.prefix = prefix;
    entry.peer_index = r.u16();
    r.skip(4); // originated time
    uint16_t attr_len = r.u16();
    ByteReader attrs(r.take(attr_len), attr_len, r.offset() - attr_len);
    while (attrs.remaining() > 0) {
      uint8_t flags = attrs.u8();
      uint8_t type = attrs.u8();
      uint16_t len = (flags & 0x10) ? attrs.u16() : attrs.u8();
      const uint8_t* value = attrs.take(len);
      if (type == kAttrAsPath)
        parse_as_path(ByteReader(value, len, attrs.offset() - len), entry.path, entry.origin);
    }
    out.push_back(std::move(entry));
  }
}

} // namespace

RibSnapshot parse_bview(const std::vector<uint8_t>& raw, const std::string& capture_date) {
  std::vector<uint8_t> data = decompress_auto(raw);
  RibSnapshot snapshot;
  snapshot.capture_date = capture_date;

  size_t pos = 0;
  while (pos < data.size()) {
    if (data.size() - pos < 12)
      throw Error("truncated MRT common header at byte offset " + std::to_string(pos));
    ByteReader header(data.data() + pos, 12, pos);
    header.skip(4); // timestamp
    uint16_t type = header.u16();
    uint16_t subtype = header.u16();
    uint32_t length = header.u32();
    if (length > data.size() - pos - 12)
      throw Error("truncated MRT record at byte offset " + std::to_string(pos) +
                  " (declared length " + std::to_string(length) + " exceeds file)");
    ByteReader body(data.data() + pos + 12, length, pos + 12);
    if (type == kTypeTableDumpV2 && subtype == kSubtypeRibIpv4Unicast) {
      parse_rib_ipv4_unicast(body, snapshot.entries);
    } else if (type == kTypeTableDumpV2 && subtype == kSubtypePeerIndexTable) {
      snapshot.peer_count = parse_peer_index_table(body);
    } else {
      ++snapshot.skipped_records;
    }
    pos += 12 + length;
  }
  return snapshot;
}

RibSnapshot parse_bview(std::istream& in, const std::string& capture_date) {
  std::vector<uint8_t> data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_bview(data, capture_date);
}

RibSnapshot parse_bview_file(const std::string& path, const std::string& capture_date) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open MRT file: " + path);
  return parse_bview(in, capture_date);
}

std::set<Ipv4Prefix> originated_prefixes(const RibSnapshot& snapshot, const std::set<Asn>& asns) {
  std::set<Ipv4Prefix> result;
  for (const auto& entry : snapshot.entries) {
    if (entry.prefix.is_default_route())
      continue;
    for (Asn origin : entry.origin) {
      if (asns.count(origin)) {
        result.insert(entry.prefix);
        break;
      }
    }
  }
  return result;
}

void export_routes(const RibSnapshot& snapshot, std::ostream& out) {
  for (const auto& entry : snapshot.entries) {
    out << entry.prefix.to_string() << '\t';
    bool first = true;
    for (Asn asn : entry.origin) {
      if (!first)
        out << ',';
      out << asn;
      first = false;
    }
    out << '\t';
    first = true;
    for (Asn asn : entry.path) {
      if (!first)
        out << ' ';
      out << asn;
      first = false;
    }
    out << '\n';
  }
}

} // namespace outagekit::mrt
