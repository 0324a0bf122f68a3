#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "outagekit/dates.hpp"
#include "outagekit/ipv4.hpp"

using namespace outagekit;

TEST_CASE("prefix parse and format round trip") {
  auto p = parse_prefix("203.0.113.0/24");
  REQUIRE(p.has_value());
  CHECK(p->to_string() == "203.0.113.0/24");
  CHECK(p->first_address() == 0xCB007100u);
  CHECK(p->last_address() == 0xCB0071FFu);
  CHECK(p->size() == 256);

  CHECK(parse_prefix("0.0.0.0/0")->is_default_route());
  CHECK(parse_prefix("10.1.2.3")->length == 32);
}

TEST_CASE("prefix parse rejects junk") {
  CHECK_FALSE(parse_prefix("256.0.0.0/8").has_value());
  CHECK_FALSE(parse_prefix("10.0.0.0/33").has_value());
  CHECK_FALSE(parse_prefix("10.0.0.1/24").has_value()); // host bits set
  CHECK_FALSE(parse_prefix("10.0.0/8").has_value());
  CHECK_FALSE(parse_prefix("").has_value());
  CHECK_FALSE(parse_prefix("10.0.0.0/-1").has_value());
}

TEST_CASE("containment") {
  auto outer = *parse_prefix("192.0.0.0/16");
  auto inner = *parse_prefix("192.0.2.0/24");
  CHECK(outer.contains(inner));
  CHECK_FALSE(inner.contains(outer));
  CHECK(outer.contains(outer));
  CHECK(parse_prefix("0.0.0.0/0")->contains(inner));
}

TEST_CASE("constructor masks host bits") {
  Ipv4Prefix p{0xC0000201u, 24};
  CHECK(p.addr == 0xC0000200u);
}

TEST_CASE("iso dates") {
  auto d = dates::parse_iso_date("2026-03-01");
  REQUIRE(d.has_value());
  CHECK(dates::format_iso_date(*d) == "2026-03-01");
  CHECK(dates::format_iso_date(*d - 1) == "2026-02-28");
  CHECK(*dates::parse_iso_date("2026-01-12") - *dates::parse_iso_date("2026-01-08") == 4);

  CHECK_FALSE(dates::parse_iso_date("2026-02-30").has_value());
  CHECK_FALSE(dates::parse_iso_date("2026-13-01").has_value());
  CHECK_FALSE(dates::parse_iso_date("2026/01/01").has_value());
  CHECK(dates::parse_iso_date("2024-02-29").has_value()); // leap year
}
