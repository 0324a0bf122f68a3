#include "outagekit/ipv4.hpp"

#include <charconv>

namespace outagekit {

Ipv4Prefix::Ipv4Prefix(uint32_t a, uint8_t len) : addr(a & mask_for(len)), length(len) {}

std::string format_ipv4(uint32_t addr) {
  std::string out;
  out.reserve(15);
  for (int shift = 24; shift >= 0; shift -= 8) {
    out += std::to_string((addr >> shift) & 0xff);
    if (shift > 0)
      out += '.';
  }
  return out;
}

std::string Ipv4Prefix::to_string() const {
  return format_ipv4(addr) + "/" + std::to_string(length);
}

namespace {

std::optional<uint32_t> parse_u32(std::string_view text, uint32_t max) {
  uint32_t value = 0;
  if (text.empty())
    return std::nullopt;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value > max)
    return std::nullopt;
  return value;
}

} // namespace

std::optional<uint32_t> parse_ipv4(const std::string& text) {
  uint32_t addr = 0;
  size_t pos = 0;
  for (int octet = 0; octet < 4; ++octet) {
    size_t dot = octet < 3 ? text.find('.', pos) : text.size();
    if (dot == std::string::npos)
      return std::nullopt;
    auto part = parse_u32(std::string_view(text).substr(pos, dot - pos), 255);
    if (!part)
      return std::nullopt;
    addr = (addr << 8) | *part;
    pos = dot + 1;
  }
  return addr;
}

std::optional<Ipv4Prefix> parse_prefix(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) {
    auto addr = parse_ipv4(text);
    if (!addr)
      return std::nullopt;
    return Ipv4Prefix{*addr, 32};
  }
  auto addr = parse_ipv4(text.substr(0, slash));
  auto len = parse_u32(std::string_view(text).substr(slash + 1), 32);
  if (!addr || !len)
    return std::nullopt;
  // Reject host bits below the mask: a prefix string must be canonical.
  if ((*addr & ~Ipv4Prefix::mask_for(static_cast<uint8_t>(*len))) != 0)
    return std::nullopt;
  return Ipv4Prefix{*addr, static_cast<uint8_t>(*len)};
}

} // namespace outagekit
