#include "outagekit/manifest.hpp"

#include "outagekit/error.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>

namespace outagekit::manifest {

uint64_t fnv1a64(const std::string& data) {
  uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string digest_hex(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void RunManifest::finalize_digest() {
  std::string canonical = subcommand;
  for (const auto& [key, value] : config)
    canonical += "\n" + key + "=" + value;
  for (const auto& path : input_paths)
    canonical += "\nin:" + path;
  config_digest = digest_hex(fnv1a64(canonical));
}

std::string utc_timestamp_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["subcommand"] = manifest.subcommand;
  doc["tool_version"] = manifest.tool_version;
  doc["config_digest"] = manifest.config_digest;
  doc["inputs"] = manifest.input_paths;
  doc["config"] = manifest.config;
  doc["started_at"] = manifest.started_at;
  doc["finished_at"] = manifest.finished_at;
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write manifest: " + path);
  out << doc.dump(2) << '\n';
}

} // namespace outagekit::manifest
