#pragma once

#include "outagekit/ipv4.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace outagekit::probe {

enum class OutcomeKind : uint8_t { SYN_ACK, RST, ICMP_UNREACHABLE, TIMEOUT };

std::string to_string(OutcomeKind kind);
OutcomeKind outcome_from_string(const std::string& name);

struct PortOutcome {
  OutcomeKind kind = OutcomeKind::TIMEOUT;
  std::optional<double> rtt_ms; // present only for SYN_ACK / RST
  uint32_t attempts = 1;
  std::optional<std::string> error; // transport failure annotation

  bool operator==(const PortOutcome&) const = default;
};

inline const std::vector<uint16_t>& default_ports() {
  static const std::vector<uint16_t> ports{80, 443, 179};
  return ports;
}

struct ProbeTarget {
  Ipv4Prefix prefix;
  uint32_t target_address = 0;
  std::vector<uint16_t> ports = default_ports();
};

/// Picks the probed host inside a prefix: base + 6 for blocks of at
/// least 8 addresses, base + 1 for smaller blocks, the address itself
/// for a /32.
ProbeTarget derive_target(const Ipv4Prefix& prefix,
                          const std::vector<uint16_t>& ports = default_ports());

struct ProbeObservation {
  Ipv4Prefix prefix;
  std::string vantage_id;
  uint32_t run_id = 0;
  int64_t started_at_ms = 0; // epoch ms; virtual time under replay
  std::map<uint16_t, PortOutcome> outcomes;

  bool operator==(const ProbeObservation&) const = default;
};

struct SweepPolicy {
  std::string vantage_id = "local";
  uint32_t run_id = 0;
  int timeout_ms = 3000;
  int retries = 1; // extra attempts after a TIMEOUT
  int max_in_flight = 64;
  double rate_pps = 128.0; // global probes-per-second cap
};

/// Thread-safe token bucket; acquire() blocks until a send credit is
/// available. Burst capacity is bounded so that sends in any one-second
/// window never exceed rate + max_in_flight.
class RateLimiter {
public:
  RateLimiter(double rate_per_sec, double capacity);
  void acquire();

private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// Transport abstraction: the live network or a deterministic scripted
/// replay. probe() must be safe to call from multiple threads.
class ProbeTransport {
public:
  virtual ~ProbeTransport() = default;

  /// Issued once before any probe; setup failures abort the sweep.
  virtual void setup() {}

  virtual PortOutcome probe(uint32_t address, uint16_t port, uint32_t run_id, uint32_t attempt,
                            int timeout_ms) = 0;

  /// Timestamp source, overridable so replay runs are reproducible.
  virtual int64_t now_epoch_ms() const;
};

/// Live TCP connect() probing. SYN-ACK when the handshake completes,
/// RST on connection refusal, ICMP_UNREACHABLE on any unreachable code,
/// TIMEOUT otherwise; other socket errors map to TIMEOUT with an
/// annotation.
class RealTransport : public ProbeTransport {
public:
  PortOutcome probe(uint32_t address, uint16_t port, uint32_t run_id, uint32_t attempt,
                    int timeout_ms) override;
};

/// One rate-limited pass over the target list. Probes run concurrently
/// up to max_in_flight; results are ordered by target index regardless
/// of completion order. A port that times out is retried per policy and
/// reports the final attempt's outcome with the attempt count.
std::vector<ProbeObservation> sweep(const std::vector<ProbeTarget>& targets,
                                    ProbeTransport& transport, const SweepPolicy& policy);

/// Line-delimited JSON with stable field order, one observation per line.
void write_observations_jsonl(const std::vector<ProbeObservation>& observations,
                              std::ostream& out);
std::vector<ProbeObservation> read_observations_jsonl(std::istream& in);

} // namespace outagekit::probe
