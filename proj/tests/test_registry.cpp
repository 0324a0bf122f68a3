#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "outagekit/registry.hpp"

#include <sstream>

using namespace outagekit;
using namespace outagekit::registry;

namespace {

DelegatedFile parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_delegated(in, "2026-01-05");
}

uint64_t enumerate_and_check(uint32_t start, uint64_t count) {
  auto blocks = decompose_interval(start, count);
  // Union must equal [start, start+count) exactly.
  std::set<uint64_t> addresses;
  for (const auto& block : blocks) {
    for (uint64_t a = block.first_address(); a <= block.last_address(); ++a) {
      bool fresh = addresses.insert(a).second;
      REQUIRE(fresh); // pairwise disjoint
    }
    // Aligned by construction of Ipv4Prefix (masked), but verify anyway.
    REQUIRE((block.addr & ~Ipv4Prefix::mask_for(block.length)) == 0);
  }
  REQUIRE(addresses.size() == count);
  REQUIRE(*addresses.begin() == start);
  REQUIRE(*addresses.rbegin() == start + count - 1);
  // Minimality: no two blocks merge into one aligned CIDR.
  for (size_t i = 0; i + 1 < blocks.size(); ++i) {
    const auto& a = blocks[i];
    const auto& b = blocks[i + 1];
    bool same_size = a.length == b.length;
    bool adjacent = a.last_address() + 1 == b.first_address();
    bool buddy = same_size && adjacent && a.length > 0 &&
                 (a.addr & Ipv4Prefix::mask_for(a.length - 1)) == a.addr;
    REQUIRE_FALSE(buddy);
  }
  return blocks.size();
}

} // namespace

TEST_CASE("delegated parsing: records, skips and rejects") {
  auto file = parse_text(
      "2|ripencc|20260105|5|19840101|20260105|+0100\n"
      "ripencc|*|asn|*|2|summary\n"
      "ripencc|IR|asn|58224|1|20100101|allocated\n"
      "ripencc|IR|asn|64500|3|20100101|assigned|opaque-id\n"
      "ripencc|IR|ipv6|2a00:1450::|32|20100101|allocated\n"
      "ripencc|IR|ipv4|198.51.100.0|768|20100101|allocated\n"
      "ripencc|IR|asn|64999|0|20100101|allocated\n"
      "garbage line\n");
  REQUIRE(file.records.size() == 3);
  CHECK(file.records[0].kind == ResourceKind::asn);
  CHECK(file.records[0].start == 58224);
  CHECK(file.records[0].count == 1);
  CHECK(file.records[0].country == "IR");
  CHECK(file.records[0].status == "allocated");
  CHECK(file.skipped_ipv6 == 1);
  REQUIRE(file.rejects.size() == 2);
  CHECK(file.rejects[0].reason == "count must be a positive integer");
  CHECK(file.rejects[0].line_number == 7);
  CHECK(file.rejects[1].line_number == 8);
}

TEST_CASE("overflow past the end of the address space is rejected") {
  auto file = parse_text("ripencc|IR|ipv4|255.255.255.0|512|20100101|allocated\n");
  CHECK(file.records.empty());
  REQUIRE(file.rejects.size() == 1);
  CHECK(file.rejects[0].reason == "address range overflows past 255.255.255.255");
}

TEST_CASE("country_asns expands counts and filters statuses") {
  auto file = parse_text(
      "ripencc|IR|asn|64500|3|20100101|allocated\n"
      "ripencc|IR|asn|58224|1|20100101|assigned\n"
      "ripencc|IR|asn|65100|5|20100101|reserved\n"
      "ripencc|DE|asn|3320|1|20100101|allocated\n");
  auto asns = country_asns(file.records, "IR");
  CHECK(asns == std::set<Asn>{58224, 64500, 64501, 64502});
  CHECK(country_asns(file.records, "FR").empty());
  CHECK(country_asns(file.records, "IR", {"reserved"}) ==
        std::set<Asn>{65100, 65101, 65102, 65103, 65104});
}

TEST_CASE("decomposition of the spec examples") {
  SUBCASE("power-of-two count keeps one block") {
    auto blocks = decompose_interval(*parse_ipv4("2.144.0.0"), 524288);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].to_string() == "2.144.0.0/13");
  }
  SUBCASE("count 768 splits into /23 + /24, verified by enumeration") {
    auto blocks = decompose_interval(*parse_ipv4("198.51.100.0"), 768);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].to_string() == "198.51.100.0/23");
    CHECK(blocks[1].to_string() == "198.51.102.0/24");
    enumerate_and_check(*parse_ipv4("198.51.100.0"), 768);
  }
  SUBCASE("count 1 is a /32") {
    auto blocks = decompose_interval(*parse_ipv4("10.1.2.3"), 1);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].to_string() == "10.1.2.3/32");
  }
}

TEST_CASE("decomposition soundness and minimality on random intervals") {
  uint64_t state = 99;
  auto next = [&state] {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return state >> 33;
  };
  for (int trial = 0; trial < 300; ++trial) {
    uint32_t start = static_cast<uint32_t>(next());
    uint64_t count = 1 + next() % 4096;
    if (static_cast<uint64_t>(start) + count - 1 > 0xffffffffull)
      continue;
    enumerate_and_check(start, count);
  }
}

TEST_CASE("country_prefixes is order independent and deterministic") {
  std::string lines[] = {
      "ripencc|IR|ipv4|5.56.0.0|16384|20100101|allocated\n",
      "ripencc|IR|ipv4|198.51.100.0|768|20100101|assigned\n",
      "ripencc|IR|ipv4|91.98.0.0|131072|20100101|allocated\n",
      "ripencc|NL|ipv4|193.0.0.0|65536|20100101|allocated\n",
  };
  auto forward = parse_text(lines[0] + lines[1] + lines[2] + lines[3]);
  auto backward = parse_text(lines[3] + lines[2] + lines[1] + lines[0]);
  auto a = country_prefixes(forward.records, "IR");
  auto b = country_prefixes(backward.records, "IR");
  REQUIRE(a.size() == 4); // /14, /23+/24, /15
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].cidr == b[i].cidr);
  CHECK(a[0].cidr.to_string() == "5.56.0.0/14");
  // Source records ride along with each decomposed block.
  CHECK(a[0].source.count == 16384);
}

TEST_CASE("registry JSON export reports both record and prefix counts") {
  auto file = parse_text(
      "ripencc|IR|asn|64500|2|20100101|allocated\n"
      "ripencc|IR|ipv4|198.51.100.0|768|20100101|allocated\n");
  std::ostringstream out;
  export_registry_json(file.records, "IR", default_statuses(), "2026-01-05", out);
  auto text = out.str();
  CHECK(text.find("\"asn_count\": 2") != std::string::npos);
  CHECK(text.find("\"ipv4_record_count\": 1") != std::string::npos);
  CHECK(text.find("\"prefix_count\": 2") != std::string::npos);
}
