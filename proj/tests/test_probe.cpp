#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "outagekit/error.hpp"
#include "outagekit/harness.hpp"
#include "outagekit/probe.hpp"

#include <algorithm>
#include <sstream>

using namespace outagekit;
using namespace outagekit::probe;
using harness::ReplayTransport;
using harness::TransportScript;

TEST_CASE("derive_target picks the sixth host, with small-prefix fallbacks") {
  CHECK(format_ipv4(derive_target(*parse_prefix("203.0.113.0/24")).target_address) ==
        "203.0.113.6");
  CHECK(format_ipv4(derive_target(*parse_prefix("10.0.0.0/8")).target_address) == "10.0.0.6");
  CHECK(format_ipv4(derive_target(*parse_prefix("192.0.2.40/30")).target_address) ==
        "192.0.2.41");
  CHECK(format_ipv4(derive_target(*parse_prefix("192.0.2.40/29")).target_address) ==
        "192.0.2.46"); // exactly 8 addresses: base + 6
  CHECK(format_ipv4(derive_target(*parse_prefix("192.0.2.41/32")).target_address) ==
        "192.0.2.41");
  CHECK(derive_target(*parse_prefix("203.0.113.0/24")).ports ==
        std::vector<uint16_t>{80, 443, 179});
}

namespace {

std::vector<ProbeTarget> three_targets() {
  return {derive_target(*parse_prefix("10.0.0.0/24")),
          derive_target(*parse_prefix("10.0.1.0/24")),
          derive_target(*parse_prefix("10.0.2.0/24"))};
}

SweepPolicy fast_policy() {
  SweepPolicy policy;
  policy.vantage_id = "test";
  policy.run_id = 7;
  policy.rate_pps = 1e6;
  policy.max_in_flight = 8;
  policy.retries = 1;
  return policy;
}

} // namespace

TEST_CASE("scripted sweep: only the scripted port answers") {
  TransportScript script;
  PortOutcome synack;
  synack.kind = OutcomeKind::SYN_ACK;
  synack.rtt_ms = 12.5;
  script.add({-1, derive_target(*parse_prefix("10.0.1.0/24")).target_address, 80, -1}, synack);

  ReplayTransport transport(script);
  auto observations = sweep(three_targets(), transport, fast_policy());
  REQUIRE(observations.size() == 3);
  CHECK(observations[1].outcomes.at(80).kind == OutcomeKind::SYN_ACK);
  CHECK(observations[1].outcomes.at(80).rtt_ms == 12.5);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(observations[i].vantage_id == "test");
    CHECK(observations[i].run_id == 7);
    REQUIRE(observations[i].outcomes.size() == 3);
    for (uint16_t port : {80, 443, 179}) {
      if (i == 1 && port == 80)
        continue;
      CHECK(observations[i].outcomes.at(port).kind == OutcomeKind::TIMEOUT);
      CHECK_FALSE(observations[i].outcomes.at(port).rtt_ms.has_value());
    }
  }
}

TEST_CASE("empty target list yields an empty observation list") {
  TransportScript script;
  ReplayTransport transport(script);
  CHECK(sweep({}, transport, fast_policy()).empty());
}

TEST_CASE("ICMP outcomes pass through") {
  TransportScript script;
  PortOutcome icmp;
  icmp.kind = OutcomeKind::ICMP_UNREACHABLE;
  auto target = derive_target(*parse_prefix("10.0.0.0/24"));
  script.add({-1, target.target_address, 179, -1}, icmp);
  ReplayTransport transport(script);
  auto observations = sweep({target}, transport, fast_policy());
  CHECK(observations[0].outcomes.at(179).kind == OutcomeKind::ICMP_UNREACHABLE);
}

TEST_CASE("retry semantics: answer on the second attempt records attempts=2") {
  auto target = derive_target(*parse_prefix("10.0.0.0/24"));
  TransportScript script;
  PortOutcome timeout; // attempt 1 times out explicitly
  timeout.kind = OutcomeKind::TIMEOUT;
  PortOutcome rst;
  rst.kind = OutcomeKind::RST;
  rst.rtt_ms = 30.0;
  script.add({-1, target.target_address, 443, 1}, timeout);
  script.add({-1, target.target_address, 443, 2}, rst);

  ReplayTransport transport(script);
  auto observations = sweep({target}, transport, fast_policy());
  CHECK(observations[0].outcomes.at(443).kind == OutcomeKind::RST);
  CHECK(observations[0].outcomes.at(443).attempts == 2);
  CHECK(observations[0].outcomes.at(80).attempts == 2); // retried, still timeout
  CHECK(observations[0].outcomes.at(80).kind == OutcomeKind::TIMEOUT);

  SweepPolicy no_retry = fast_policy();
  no_retry.retries = 0;
  ReplayTransport transport2(script);
  auto observations2 = sweep({target}, transport2, no_retry);
  CHECK(observations2[0].outcomes.at(443).kind == OutcomeKind::TIMEOUT);
  CHECK(observations2[0].outcomes.at(443).attempts == 1);
}

TEST_CASE("determinism: identical script and policy give identical observations") {
  TransportScript script;
  PortOutcome rst;
  rst.kind = OutcomeKind::RST;
  rst.rtt_ms = 5.0;
  for (const auto& target : three_targets())
    script.add({-1, target.target_address, 443, -1}, rst);

  std::string first, second;
  for (std::string* out : {&first, &second}) {
    ReplayTransport transport(script);
    auto observations = sweep(three_targets(), transport, fast_policy());
    std::ostringstream ss;
    write_observations_jsonl(observations, ss);
    *out = ss.str();
  }
  CHECK(first == second);
  CHECK_FALSE(first.empty());
}

TEST_CASE("rate conformance: sends per second stay under rate + in-flight") {
  const double rate = 600.0;
  SweepPolicy policy = fast_policy();
  policy.rate_pps = rate;
  policy.max_in_flight = 16;

  std::vector<ProbeTarget> targets;
  for (int i = 0; i < 120; ++i) {
    auto target = derive_target(Ipv4Prefix{0x0A000000u + static_cast<uint32_t>(i) * 256, 24});
    target.ports = {80, 443, 179};
    targets.push_back(target);
  }
  TransportScript script;
  ReplayTransport transport(script);
  auto observations = sweep(targets, transport, policy);
  CHECK(observations.size() == targets.size());

  auto log = transport.send_log();
  REQUIRE(log.size() == targets.size() * 3);
  std::vector<double> times;
  for (const auto& entry : log)
    times.push_back(entry.elapsed_s);
  std::sort(times.begin(), times.end());
  for (size_t i = 0; i < times.size(); ++i) {
    size_t j = i;
    while (j < times.size() && times[j] < times[i] + 1.0)
      ++j;
    REQUIRE(static_cast<double>(j - i) <= rate + policy.max_in_flight);
  }
}

TEST_CASE("sweep rejects bad policy") {
  TransportScript script;
  ReplayTransport transport(script);
  SweepPolicy policy = fast_policy();
  policy.rate_pps = 0;
  CHECK_THROWS_AS(sweep(three_targets(), transport, policy), Error);
}

TEST_CASE("transport setup failure aborts before any probe") {
  struct FailingTransport : ProbeTransport {
    void setup() override { throw Error("no raw socket"); }
    PortOutcome probe(uint32_t, uint16_t, uint32_t, uint32_t, int) override {
      return {};
    }
  } transport;
  CHECK_THROWS_AS(sweep(three_targets(), transport, fast_policy()), Error);
}

TEST_CASE("observation JSONL round trip") {
  TransportScript script;
  PortOutcome synack;
  synack.kind = OutcomeKind::SYN_ACK;
  synack.rtt_ms = 3.25;
  script.add({-1, derive_target(*parse_prefix("10.0.0.0/24")).target_address, 80, -1}, synack);
  ReplayTransport transport(script);
  auto observations = sweep(three_targets(), transport, fast_policy());

  std::stringstream ss;
  write_observations_jsonl(observations, ss);
  auto parsed = read_observations_jsonl(ss);
  CHECK(parsed == observations);
}

TEST_CASE("malformed observation line reports its line number") {
  std::stringstream ss("{\"prefix\": \"10.0.0.0/24\"}\n");
  CHECK_THROWS_WITH_AS(read_observations_jsonl(ss), doctest::Contains("line 1"), Error);
}
