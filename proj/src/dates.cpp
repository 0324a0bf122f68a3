#include "outagekit/dates.hpp"

#include <charconv>
#include <cstdio>

namespace outagekit::dates {

namespace {

// Civil-date conversions after Hinnant's chrono algorithms.
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  int64_t era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  unsigned doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int64_t>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

bool parse_part(const std::string& text, size_t begin, size_t end, unsigned& out) {
  if (begin >= end || end > text.size())
    return false;
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + end, value);
  if (ec != std::errc{} || ptr != text.data() + end)
    return false;
  out = value;
  return true;
}

} // namespace

std::optional<int64_t> parse_iso_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    return std::nullopt;
  unsigned y = 0, m = 0, d = 0;
  if (!parse_part(text, 0, 4, y) || !parse_part(text, 5, 7, m) || !parse_part(text, 8, 10, d))
    return std::nullopt;
  if (m < 1 || m > 12 || d < 1 || d > 31)
    return std::nullopt;
  int64_t days = days_from_civil(y, m, d);
  // Round trip to reject day-of-month overflow like Feb 30.
  if (format_iso_date(days) != text)
    return std::nullopt;
  return days;
}

std::string format_iso_date(int64_t days_since_epoch) {
  int64_t y;
  unsigned m, d;
  civil_from_days(days_since_epoch, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", static_cast<long long>(y), m, d);
  return buf;
}

bool is_valid(const std::string& text) { return parse_iso_date(text).has_value(); }

} // namespace outagekit::dates
