#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "outagekit/decompress.hpp"
#include "outagekit/error.hpp"
#include "outagekit/fixtures.hpp"
#include "outagekit/harness.hpp"
#include "outagekit/mrt.hpp"

#include <future>
#include <sstream>

using namespace outagekit;

namespace {

// Two-record file built byte-by-byte from the TABLE_DUMP_V2 wire
// layout: a one-peer PEER_INDEX_TABLE followed by one RIB_IPV4_UNICAST
// for 203.0.113.0/24 with AS path 64500 64511.
std::vector<uint8_t> hand_built_bview() {
  return {
      // --- common header: ts=0, type=13, subtype=1 (PEER_INDEX_TABLE), len=21
      0x00, 0x00, 0x00, 0x00, 0x00, 0x0D, 0x00, 0x01, 0x00, 0x00, 0x00, 0x15,
      // collector BGP id
      0x0A, 0x00, 0x00, 0x01,
      // view name length 0
      0x00, 0x00,
      // peer count 1
      0x00, 0x01,
      // peer: type 0x02 (v4 address, 4-byte AS), bgp id, address, AS 64516
      0x02, 0xC0, 0x00, 0x02, 0x01, 0xC0, 0x00, 0x02, 0x02, 0x00, 0x00, 0xFC, 0x04,
      // --- common header: ts=0, type=13, subtype=2 (RIB_IPV4_UNICAST), len=31
      0x00, 0x00, 0x00, 0x00, 0x00, 0x0D, 0x00, 0x02, 0x00, 0x00, 0x00, 0x1F,
      // sequence 0
      0x00, 0x00, 0x00, 0x00,
      // prefix length 24, prefix bytes 203.0.113
      0x18, 0xCB, 0x00, 0x71,
      // entry count 1
      0x00, 0x01,
      // entry: peer index 0, originated time 0, attr length 13
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x0D,
      // AS_PATH attribute: flags 0x40, type 2, length 10,
      // one AS_SEQUENCE segment of two 4-byte ASNs 64500, 64511
      0x40, 0x02, 0x0A, 0x02, 0x02, 0x00, 0x00, 0xFB, 0xF4, 0x00, 0x00, 0xFB, 0xFF};
}

} // namespace

TEST_CASE("hand-built two-record bview parses to one route entry") {
  auto snapshot = mrt::parse_bview(hand_built_bview(), "2026-01-05");
  CHECK(snapshot.capture_date == "2026-01-05");
  CHECK(snapshot.peer_count == 1);
  REQUIRE(snapshot.entries.size() == 1);
  const auto& entry = snapshot.entries[0];
  CHECK(entry.prefix.to_string() == "203.0.113.0/24");
  CHECK(entry.path == std::vector<mrt::Asn>{64500, 64511});
  CHECK(entry.origin == std::set<mrt::Asn>{64511});
  CHECK(entry.peer_index == 0);
}

TEST_CASE("file with zero RIB records parses to an empty snapshot") {
  auto bytes = hand_built_bview();
  bytes.resize(12 + 21); // keep only the peer index table
  auto snapshot = mrt::parse_bview(bytes, "2026-01-05");
  CHECK(snapshot.entries.empty());
  CHECK(snapshot.peer_count == 1);
}

TEST_CASE("AS_SET at the end of the path yields every member as origin") {
  // Same RIB record as the hand-built fixture, with the AS_SEQUENCE
  // followed by an AS_SET {64496, 64497}.
  std::vector<uint8_t> bytes = {
      0x00, 0x00, 0x00, 0x00, 0x00, 0x0D, 0x00, 0x02, 0x00, 0x00, 0x00, 0x29,
      0x00, 0x00, 0x00, 0x00,
      0x18, 0xCB, 0x00, 0x71,
      0x00, 0x01,
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x17,
      0x40, 0x02, 0x14,
      // AS_SEQUENCE [64500, 64511]
      0x02, 0x02, 0x00, 0x00, 0xFB, 0xF4, 0x00, 0x00, 0xFB, 0xFF,
      // AS_SET {64496, 64497}
      0x01, 0x02, 0x00, 0x00, 0xFB, 0xF0, 0x00, 0x00, 0xFB, 0xF1};
  auto snapshot = mrt::parse_bview(bytes, "x");
  REQUIRE(snapshot.entries.size() == 1);
  CHECK(snapshot.entries[0].origin == std::set<mrt::Asn>{64496, 64497});
  CHECK(snapshot.entries[0].path == std::vector<mrt::Asn>{64500, 64511, 64496, 64497});
}

TEST_CASE("truncated record is a hard error with a byte offset") {
  auto bytes = hand_built_bview();
  bytes.resize(bytes.size() - 5);
  CHECK_THROWS_WITH_AS(mrt::parse_bview(bytes, "x"),
                       doctest::Contains("byte offset"), Error);

  std::vector<uint8_t> short_header = {0x00, 0x00, 0x00};
  CHECK_THROWS_AS(mrt::parse_bview(short_header, "x"), Error);
}

TEST_CASE("unknown record types are skipped and counted, never fatal") {
  auto bytes = hand_built_bview();
  // Append a BGP4MP (type 16) record and an IPv6 unicast RIB (subtype 4).
  std::vector<uint8_t> extra = {0x00, 0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x04,
                                0x00, 0x00, 0x00, 0x02, 0xAA, 0xBB,
                                0x00, 0x00, 0x00, 0x00, 0x00, 0x0D, 0x00, 0x04,
                                0x00, 0x00, 0x00, 0x01, 0xCC};
  bytes.insert(bytes.end(), extra.begin(), extra.end());
  auto snapshot = mrt::parse_bview(bytes, "x");
  CHECK(snapshot.entries.size() == 1);
  CHECK(snapshot.skipped_records == 2);
}

TEST_CASE("synth_rib round trips through parse_bview") {
  std::vector<mrt::RouteEntry> entries;
  mrt::RouteEntry a;
  a.prefix = *parse_prefix("5.56.0.0/14");
  a.path = {64500, 6939, 43754};
  a.origin = {43754};
  a.peer_index = 0;
  entries.push_back(a);
  mrt::RouteEntry b = a; // duplicate (prefix, peer) pair must survive
  b.peer_index = 1;
  b.path = {64501, 6939, 43754};
  entries.push_back(b);
  mrt::RouteEntry c;
  c.prefix = *parse_prefix("91.98.0.0/15");
  c.path = {64500, 12880, 64496, 64497};
  c.origin = {64496, 64497}; // AS_SET tail
  c.peer_index = 1;
  entries.push_back(c);
  mrt::RouteEntry d;
  d.prefix = *parse_prefix("0.0.0.0/0");
  d.path = {64500, 48159};
  d.origin = {48159};
  d.peer_index = 0;
  entries.push_back(d);

  auto bytes = harness::synth_rib(entries);
  auto snapshot = mrt::parse_bview(bytes, "2026-04-07");
  CHECK(snapshot.entries == entries);
  CHECK(snapshot.peer_count == 2);
}

TEST_CASE("originated_prefixes filters by origin, dedupes, drops default routes") {
  std::vector<mrt::RouteEntry> entries;
  for (uint32_t peer = 0; peer < 2; ++peer) {
    mrt::RouteEntry e;
    e.prefix = *parse_prefix("5.56.0.0/14");
    e.path = {64500 + peer, 43754};
    e.origin = {43754};
    e.peer_index = peer;
    entries.push_back(e);
  }
  mrt::RouteEntry foreign;
  foreign.prefix = *parse_prefix("8.8.8.0/24");
  foreign.path = {64500, 15169};
  foreign.origin = {15169};
  entries.push_back(foreign);
  mrt::RouteEntry dflt;
  dflt.prefix = *parse_prefix("0.0.0.0/0");
  dflt.path = {64500, 43754};
  dflt.origin = {43754};
  entries.push_back(dflt);
  mrt::RouteEntry asset;
  asset.prefix = *parse_prefix("31.24.200.0/21");
  asset.path = {64500, 64496, 64497};
  asset.origin = {64496, 64497};
  entries.push_back(asset);

  auto snapshot = mrt::parse_bview(harness::synth_rib(entries), "x");
  auto prefixes = mrt::originated_prefixes(snapshot, {43754, 64497});
  CHECK(prefixes.size() == 2); // deduped /14 plus the AS_SET route
  CHECK(prefixes.count(*parse_prefix("5.56.0.0/14")) == 1);
  CHECK(prefixes.count(*parse_prefix("31.24.200.0/21")) == 1);

  CHECK(mrt::originated_prefixes(snapshot, {65000}).empty());

  // Monotone in the ASN set.
  auto smaller = mrt::originated_prefixes(snapshot, {43754});
  for (const auto& prefix : smaller)
    CHECK(prefixes.count(prefix) == 1);
}

TEST_CASE("gzip and bzip2 inputs are sniffed by magic bytes") {
  auto raw = hand_built_bview();
  auto gz = fixtures::gzip_compress(raw);
  REQUIRE(gz.size() > 2);
  CHECK(sniff_compression(gz.data(), gz.size()) == Compression::gzip);
  auto snapshot = mrt::parse_bview(gz, "x");
  CHECK(snapshot.entries.size() == 1);

  if (bzip2_supported()) {
    // Tiny pre-made bzip2 stream of the ASCII bytes "outagekit\n";
    // checks the decompressor wiring rather than MRT structure.
    const std::vector<uint8_t> bz = {
        0x42, 0x5a, 0x68, 0x39, 0x31, 0x41, 0x59, 0x26, 0x53, 0x59, 0x30, 0x51,
        0xcc, 0x0e, 0x00, 0x00, 0x03, 0x41, 0x80, 0x00, 0x10, 0x22, 0xa8, 0x86,
        0x00, 0x20, 0x00, 0x22, 0x0d, 0x18, 0x42, 0x0c, 0x98, 0x87, 0x5d, 0xa8,
        0x95, 0x27, 0x8b, 0xb9, 0x22, 0x9c, 0x28, 0x48, 0x18, 0x28, 0xe6, 0x07,
        0x00};
    CHECK(sniff_compression(bz.data(), bz.size()) == Compression::bzip2);
    auto plain = decompress_auto(bz);
    CHECK(std::string(plain.begin(), plain.end()) == "outagekit\n");
  }
}

TEST_CASE("fuzzed truncations and mutations never crash the parser") {
  auto base = hand_built_bview();
  uint64_t state = 12345;
  auto next = [&state] {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return state >> 33;
  };
  for (int trial = 0; trial < 3000; ++trial) {
    auto bytes = base;
    size_t cut = next() % (bytes.size() + 1);
    bytes.resize(cut);
    for (int flips = static_cast<int>(next() % 4); flips > 0 && !bytes.empty(); --flips)
      bytes[next() % bytes.size()] ^= static_cast<uint8_t>(1 + next() % 255);
    try {
      auto snapshot = mrt::parse_bview(bytes, "x");
      (void)snapshot;
    } catch (const Error&) {
      // errors are fine; crashes or hangs are not
    }
  }
}

TEST_CASE("parsing is safe to run concurrently") {
  auto bytes = hand_built_bview();
  std::vector<std::future<mrt::RibSnapshot>> futures;
  for (int i = 0; i < 4; ++i)
    futures.push_back(
        std::async(std::launch::async, [&bytes] { return mrt::parse_bview(bytes, "x"); }));
  for (auto& future : futures)
    CHECK(future.get().entries.size() == 1);
}

TEST_CASE("route export format") {
  auto snapshot = mrt::parse_bview(hand_built_bview(), "x");
  std::ostringstream out;
  mrt::export_routes(snapshot, out);
  CHECK(out.str() == "203.0.113.0/24\t64511\t64500 64511\n");
}
