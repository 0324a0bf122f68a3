#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace outagekit::dates {

/// Days since 1970-01-01 for an ISO "yyyy-mm-dd" string.
std::optional<int64_t> parse_iso_date(const std::string& text);

std::string format_iso_date(int64_t days_since_epoch);

/// True when `text` parses as a calendar date.
bool is_valid(const std::string& text);

} // namespace outagekit::dates
