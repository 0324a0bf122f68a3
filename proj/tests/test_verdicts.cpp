#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "outagekit/error.hpp"
#include "outagekit/verdicts.hpp"

#include <random>

using namespace outagekit;
using namespace outagekit::verdicts;
using probe::OutcomeKind;

namespace {
constexpr OutcomeKind kKinds[4] = {OutcomeKind::SYN_ACK, OutcomeKind::RST,
                                   OutcomeKind::ICMP_UNREACHABLE, OutcomeKind::TIMEOUT};
constexpr auto T = OutcomeKind::TIMEOUT;
constexpr auto SA = OutcomeKind::SYN_ACK;
constexpr auto R = OutcomeKind::RST;
constexpr auto IU = OutcomeKind::ICMP_UNREACHABLE;
} // namespace

TEST_CASE("classifier anchors") {
  CHECK(classify(T, T, T) == Verdict::NULL_ROUTE);
  CHECK(classify(T, T, R) == Verdict::FIREWALL_ACL);
  CHECK(classify(SA, T, IU) == Verdict::REACHABLE); // handshake beats ICMP
  CHECK(classify(T, IU, T) == Verdict::BGP_WITHDRAW);
  CHECK(classify(T, T, SA) == Verdict::AMBIGUOUS); // no paper category fits
  CHECK(classify(R, T, T) == Verdict::REACHABLE);  // app-port RST is a response
  CHECK(classify(T, R, SA) == Verdict::REACHABLE);
  CHECK(classify(IU, IU, IU) == Verdict::BGP_WITHDRAW);
}

TEST_CASE("classifier is total and NULL_ROUTE is unique over all 64 triples") {
  int null_route_count = 0;
  for (OutcomeKind a : kKinds)
    for (OutcomeKind b : kKinds)
      for (OutcomeKind c : kKinds) {
        Verdict v = classify(a, b, c);
        bool known = false;
        for (Verdict candidate : kAllVerdicts)
          if (v == candidate)
            known = true;
        REQUIRE(known);
        if (v == Verdict::NULL_ROUTE)
          ++null_route_count;
      }
  CHECK(null_route_count == 1);
}

TEST_CASE("consensus majority, plurality, and singletons") {
  SUBCASE("strict majority wins") {
    auto [v, support] = consensus({{Verdict::NULL_ROUTE, 30}, {Verdict::REACHABLE, 4}});
    CHECK(v == Verdict::NULL_ROUTE);
    CHECK(support == doctest::Approx(30.0 / 34.0));
  }
  SUBCASE("an even split is AMBIGUOUS at support 0.5") {
    auto [v, support] = consensus({{Verdict::NULL_ROUTE, 5}, {Verdict::REACHABLE, 5}});
    CHECK(v == Verdict::AMBIGUOUS);
    CHECK(support == doctest::Approx(0.5));
  }
  SUBCASE("single run") {
    auto [v, support] = consensus({{Verdict::REACHABLE, 1}});
    CHECK(v == Verdict::REACHABLE);
    CHECK(support == doctest::Approx(1.0));
  }
  SUBCASE("plurality below half is AMBIGUOUS with the top fraction") {
    auto [v, support] = consensus({{Verdict::NULL_ROUTE, 4},
                                   {Verdict::REACHABLE, 3},
                                   {Verdict::BGP_WITHDRAW, 3}});
    CHECK(v == Verdict::AMBIGUOUS);
    CHECK(support == doctest::Approx(0.4));
  }
  SUBCASE("exactly half is not a majority") {
    auto [v, support] = consensus({{Verdict::NULL_ROUTE, 17}, {Verdict::REACHABLE, 17}});
    CHECK(v == Verdict::AMBIGUOUS);
  }
  SUBCASE("empty multiset is an error") {
    CHECK_THROWS_AS(consensus({}), Error);
  }
}

TEST_CASE("planted-truth recovery under bounded noise") {
  std::mt19937_64 rng(202604);
  const Verdict concrete[4] = {Verdict::NULL_ROUTE, Verdict::REACHABLE, Verdict::BGP_WITHDRAW,
                               Verdict::FIREWALL_ACL};
  for (int trial = 0; trial < 2000; ++trial) {
    Verdict truth = concrete[rng() % 4];
    uint32_t runs = 1 + static_cast<uint32_t>(rng() % 34);
    double noise_rate = (rng() % 50) / 100.0; // <= 0.49
    uint32_t noised = static_cast<uint32_t>(noise_rate * runs);
    std::map<Verdict, uint32_t> run_verdicts;
    run_verdicts[truth] += runs - noised;
    for (uint32_t i = 0; i < noised; ++i) {
      Verdict noise;
      do {
        noise = concrete[rng() % 4];
      } while (noise == truth);
      ++run_verdicts[noise];
    }
    auto [v, support] = consensus(run_verdicts);
    REQUIRE(v == truth);
    REQUIRE(support > 0.5);
  }
}

namespace {

std::vector<ConsensusRecord> make_records(const std::string& vantage,
                                          std::map<Verdict, uint64_t> counts, uint32_t runs) {
  std::vector<ConsensusRecord> records;
  uint32_t index = 0;
  for (const auto& [verdict, count] : counts) {
    for (uint64_t i = 0; i < count; ++i) {
      ConsensusRecord record;
      record.prefix = Ipv4Prefix{0x05000000u + index * 256, 24};
      ++index;
      record.vantage_id = vantage;
      record.run_verdicts[verdict] = runs;
      record.consensus = verdict;
      record.support = 1.0;
      records.push_back(std::move(record));
    }
  }
  return records;
}

} // namespace

TEST_CASE("distribution counts, fractions and vantage guard") {
  auto records = make_records("ams",
                              {{Verdict::NULL_ROUTE, 4416},
                               {Verdict::REACHABLE, 92},
                               {Verdict::BGP_WITHDRAW, 57},
                               {Verdict::FIREWALL_ACL, 6}},
                              34);
  auto dist = distribution(records, "ams");
  CHECK(dist.total == 4571);
  CHECK(dist.runs == 34);
  CHECK(dist.counts.at(Verdict::NULL_ROUTE) == 4416);
  CHECK(dist.fractions.at(Verdict::NULL_ROUTE) == doctest::Approx(0.96609).epsilon(1e-4));
  CHECK(dist.fractions.at(Verdict::AMBIGUOUS) == 0.0);
  double sum = 0;
  for (const auto& [verdict, fraction] : dist.fractions)
    sum += fraction;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  records[0].vantage_id = "fra";
  CHECK_THROWS_AS(distribution(records, "ams"), Error);
}

TEST_CASE("distribution fractions sum to one on random inputs") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<Verdict, uint64_t> counts;
    for (Verdict v : kAllVerdicts)
      counts[v] = rng() % 50;
    uint64_t total = 0;
    for (auto& [v, c] : counts)
      total += c;
    if (total == 0)
      continue;
    auto dist = distribution(make_records("x", counts, 10), "x");
    double sum = 0;
    for (const auto& [verdict, fraction] : dist.fractions)
      sum += fraction;
    REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("cross-vantage spread") {
  auto d1 = distribution(make_records("a", {{Verdict::NULL_ROUTE, 95}, {Verdict::REACHABLE, 5}}, 3),
                         "a");
  auto d2 = distribution(
      make_records("b", {{Verdict::NULL_ROUTE, 975}, {Verdict::REACHABLE, 25}}, 3), "b");
  CHECK(cross_vantage_spread({d1, d2}, Verdict::NULL_ROUTE) == doctest::Approx(2.5));
  CHECK(cross_vantage_spread({d1, d1}, Verdict::NULL_ROUTE) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cross_vantage_spread({d1}, Verdict::NULL_ROUTE), Error);
}

TEST_CASE("consensus is invariant under run reordering") {
  // Counts are an order-free representation already; check that feeding
  // runs in different orders into the counting map agrees.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Verdict> runs;
    for (int i = 0; i < 20; ++i)
      runs.push_back(kAllVerdicts[rng() % 5]);
    std::map<Verdict, uint32_t> forward, backward;
    for (Verdict v : runs)
      ++forward[v];
    std::reverse(runs.begin(), runs.end());
    for (Verdict v : runs)
      ++backward[v];
    auto a = consensus(forward);
    auto b = consensus(backward);
    REQUIRE(a.first == b.first);
    REQUIRE(a.second == doctest::Approx(b.second));
  }
}
