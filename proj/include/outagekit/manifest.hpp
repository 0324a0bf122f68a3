#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace outagekit::manifest {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a over a canonical rendering of the effective configuration.
/// Identical inputs and config always hash identically.
uint64_t fnv1a64(const std::string& data);
std::string digest_hex(uint64_t value);

/// Provenance for one CLI invocation. Reports embed the stable parts
/// (tool version and config digest); wall-clock timestamps live only in
/// the sidecar manifest file so report bytes stay reproducible.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> input_paths;
  std::map<std::string, std::string> config; // canonical key -> value
  std::string config_digest;                 // hex, derived from config
  std::string tool_version = kToolVersion;
  std::string started_at;  // ISO-8601 UTC
  std::string finished_at;

  void finalize_digest();
};

std::string utc_timestamp_now();

/// Writes the manifest JSON (the one artifact that carries timestamps).
void write_manifest(const RunManifest& manifest, const std::string& path);

} // namespace outagekit::manifest
