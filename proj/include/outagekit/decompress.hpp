#pragma once

#include <cstdint>
#include <vector>

namespace outagekit {

enum class Compression { none, gzip, bzip2 };

/// Sniffs compression from the leading magic bytes (gzip 1f 8b, bzip2 "BZh").
Compression sniff_compression(const uint8_t* data, size_t size);

/// Inflates gzip or bzip2 payloads in full; passes raw data through.
/// Throws Error on corrupt streams or when bzip2 support is unavailable.
std::vector<uint8_t> decompress_auto(const std::vector<uint8_t>& data);

bool bzip2_supported();

} // namespace outagekit
