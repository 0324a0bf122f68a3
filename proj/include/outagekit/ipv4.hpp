#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace outagekit {

/// An IPv4 CIDR block. The address is kept in host byte order with all
/// bits below the prefix length cleared, so two prefixes compare equal
/// iff they denote the same block.
struct Ipv4Prefix {
  uint32_t addr = 0;
  uint8_t length = 0;

  Ipv4Prefix() = default;
  Ipv4Prefix(uint32_t a, uint8_t len);

  static uint32_t mask_for(uint8_t len) {
    return len == 0 ? 0u : ~uint32_t{0} << (32 - len);
  }

  uint32_t first_address() const { return addr; }
  uint32_t last_address() const { return addr | ~mask_for(length); }
  uint64_t size() const { return uint64_t{1} << (32 - length); }

  bool is_default_route() const { return addr == 0 && length == 0; }

  /// True when `other` lies inside this block (equal counts as contained).
  bool contains(const Ipv4Prefix& other) const {
    return length <= other.length &&
           (other.addr & mask_for(length)) == addr;
  }

  auto operator<=>(const Ipv4Prefix&) const = default;

  std::string to_string() const;
};

std::string format_ipv4(uint32_t addr);

std::optional<uint32_t> parse_ipv4(const std::string& text);

/// Parses "a.b.c.d/len". Host bits below the mask must be zero.
std::optional<Ipv4Prefix> parse_prefix(const std::string& text);

} // namespace outagekit
