#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "outagekit/coverage.hpp"
#include "outagekit/error.hpp"
#include "outagekit/harness.hpp"

#include <random>

using namespace outagekit;
using namespace outagekit::coverage;

namespace {

std::vector<AllocatedPrefix> alloc(std::initializer_list<const char*> cidrs) {
  std::vector<AllocatedPrefix> out;
  for (const char* text : cidrs)
    out.push_back({*parse_prefix(text), {}});
  std::sort(out.begin(), out.end());
  return out;
}

std::set<Ipv4Prefix> ann(std::initializer_list<const char*> cidrs) {
  std::set<Ipv4Prefix> out;
  for (const char* text : cidrs)
    out.insert(*parse_prefix(text));
  return out;
}

} // namespace

TEST_CASE("the three covering relations") {
  SUBCASE("more-specific announcement covers") {
    auto r = compute_coverage(alloc({"192.0.2.0/24"}), ann({"192.0.2.0/25"}), "d");
    CHECK(r.covered_count == 1);
  }
  SUBCASE("aggregate announcement covers") {
    auto r = compute_coverage(alloc({"192.0.2.0/24"}), ann({"192.0.0.0/16"}), "d");
    CHECK(r.covered_count == 1);
  }
  SUBCASE("exact announcement covers") {
    auto r = compute_coverage(alloc({"192.0.2.0/24"}), ann({"192.0.2.0/24"}), "d");
    CHECK(r.covered_count == 1);
  }
  SUBCASE("empty announced set covers nothing") {
    auto r = compute_coverage(alloc({"198.51.100.0/24"}), {}, "d");
    CHECK(r.covered_count == 0);
    CHECK(r.coverage_fraction == 0.0);
    CHECK(r.uncovered_set.size() == 1);
  }
  SUBCASE("disjoint announcement does not cover") {
    auto r = compute_coverage(alloc({"192.0.2.0/24"}), ann({"198.51.100.0/24"}), "d");
    CHECK(r.covered_count == 0);
  }
}

TEST_CASE("empty allocated set is an error") {
  CHECK_THROWS_AS(compute_coverage({}, ann({"10.0.0.0/8"}), "d"), Error);
}

TEST_CASE("coverage counts are consistent") {
  auto r = compute_coverage(alloc({"10.0.0.0/20", "10.0.16.0/20", "10.0.32.0/20"}),
                            ann({"10.0.0.0/20", "10.0.16.0/21"}), "d");
  CHECK(r.allocated_count == 3);
  CHECK(r.covered_count == 2);
  CHECK(r.covered_count + r.uncovered_set.size() == r.allocated_count);
  CHECK(r.coverage_fraction == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("oracle equivalence on random small universes") {
  std::mt19937_64 rng(4242);
  auto random_prefix = [&rng](uint32_t base) {
    int length = 17 + static_cast<int>(rng() % 16); // /17 .. /32 inside a /16
    uint32_t offset = static_cast<uint32_t>(rng()) & 0x0000ffffu;
    return Ipv4Prefix{base | offset, static_cast<uint8_t>(length)};
  };
  const uint32_t base = 0x0A140000; // 10.20.0.0/16
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AllocatedPrefix> allocated;
    std::set<Ipv4Prefix> seen;
    size_t n_alloc = 1 + rng() % 40;
    for (size_t i = 0; i < n_alloc; ++i) {
      auto prefix = random_prefix(base);
      if (seen.insert(prefix).second)
        allocated.push_back({prefix, {}});
    }
    std::sort(allocated.begin(), allocated.end());
    std::set<Ipv4Prefix> announced;
    size_t n_ann = rng() % 40;
    for (size_t i = 0; i < n_ann; ++i)
      announced.insert(random_prefix(base));

    auto result = compute_coverage(allocated, announced, "d");
    auto expected = harness::coverage_oracle(allocated, announced);
    std::set<Ipv4Prefix> got;
    for (const auto& prefix : result.covered_set)
      got.insert(prefix.cidr);
    REQUIRE(got == expected);
  }
}

TEST_CASE("coverage is monotone in the announced set") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<AllocatedPrefix> allocated;
    for (int i = 0; i < 20; ++i)
      allocated.push_back(
          {Ipv4Prefix{0x0A000000u + static_cast<uint32_t>(i) * 4096, 20}, {}});
    std::sort(allocated.begin(), allocated.end());
    std::set<Ipv4Prefix> announced;
    for (int i = 0; i < 8; ++i)
      announced.insert(
          Ipv4Prefix{0x0A000000u + static_cast<uint32_t>(rng() % 20) * 4096, 20});
    auto before = compute_coverage(allocated, announced, "d");
    announced.insert(Ipv4Prefix{0x0A000000u + static_cast<uint32_t>(rng() % 20) * 4096, 21});
    auto after = compute_coverage(allocated, announced, "d");
    for (const auto& prefix : before.covered_set) {
      bool still = std::find(after.covered_set.begin(), after.covered_set.end(), prefix) !=
                   after.covered_set.end();
      REQUIRE(still);
    }
  }
}

TEST_CASE("diff_coverage identity and flag logic") {
  auto allocated = alloc({"10.0.0.0/20", "10.0.16.0/20", "10.0.32.0/20", "10.0.48.0/20"});
  auto before = compute_coverage(
      allocated, ann({"10.0.0.0/20", "10.0.16.0/20", "10.0.32.0/20"}), "2019-11-17");
  auto same = diff_coverage(before, before);
  CHECK(same.lost.empty());
  CHECK(same.gained.empty());
  CHECK(same.net_pp == 0.0);
  CHECK_FALSE(same.withdrawal_event);

  auto after = compute_coverage(allocated, ann({"10.0.0.0/20", "10.0.48.0/21"}), "2019-11-20");
  auto diff = diff_coverage(before, after);
  CHECK(diff.lost.size() == 2);
  CHECK(diff.gained.size() == 1);
  CHECK(diff.net_pp == doctest::Approx(-25.0));
  CHECK(diff.withdrawal_event); // -25 pp is well past the 5 pp default

  auto small_after =
      compute_coverage(allocated, ann({"10.0.0.0/20", "10.0.16.0/20"}), "2022-09-25");
  auto small_diff = diff_coverage(before, small_after);
  CHECK(small_diff.net_pp == doctest::Approx(-25.0));
  CHECK(diff_coverage(before, small_after, 30.0).withdrawal_event == false);
}

TEST_CASE("diff_coverage rejects mismatched universes") {
  auto before = compute_coverage(alloc({"10.0.0.0/20"}), ann({"10.0.0.0/20"}), "a");
  auto after = compute_coverage(alloc({"10.0.16.0/20"}), ann({}), "b");
  CHECK_THROWS_WITH_AS(diff_coverage(before, after),
                       doctest::Contains("symmetric difference has 2"), Error);
}

TEST_CASE("trie handles default route and deep nesting") {
  PrefixTrie trie(ann({"0.0.0.0/0"}));
  CHECK(trie.covers(*parse_prefix("203.0.113.0/24")));
  PrefixTrie host_trie(ann({"10.0.0.7/32"}));
  CHECK(host_trie.covers(*parse_prefix("10.0.0.0/24"))); // more-specific inside
  CHECK_FALSE(host_trie.covers(*parse_prefix("10.0.1.0/24")));
}
