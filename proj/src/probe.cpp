#include "outagekit/probe.hpp"

#include "outagekit/error.hpp"

#include <nlohmann/json.hpp>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

namespace outagekit::probe {

std::string to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::SYN_ACK: return "SYN_ACK";
    case OutcomeKind::RST: return "RST";
    case OutcomeKind::ICMP_UNREACHABLE: return "ICMP_UNREACHABLE";
    case OutcomeKind::TIMEOUT: return "TIMEOUT";
  }
  return "TIMEOUT";
}

OutcomeKind outcome_from_string(const std::string& name) {
  if (name == "SYN_ACK") return OutcomeKind::SYN_ACK;
  if (name == "RST") return OutcomeKind::RST;
  if (name == "ICMP_UNREACHABLE") return OutcomeKind::ICMP_UNREACHABLE;
  if (name == "TIMEOUT") return OutcomeKind::TIMEOUT;
  throw Error("unknown port outcome: " + name);
}

ProbeTarget derive_target(const Ipv4Prefix& prefix, const std::vector<uint16_t>& ports) {
  ProbeTarget target;
  target.prefix = prefix;
  target.ports = ports;
  if (prefix.length == 32)
    target.target_address = prefix.addr;
  else if (prefix.size() >= 8)
    target.target_address = prefix.addr + 6;
  else
    target.target_address = prefix.addr + 1;
  return target;
}

struct RateLimiter::Impl {
  std::mutex mutex;
  double rate;
  double capacity;
  double tokens;
  std::chrono::steady_clock::time_point last_refill;
};

RateLimiter::RateLimiter(double rate_per_sec, double capacity) : impl_(std::make_shared<Impl>()) {
  if (rate_per_sec <= 0)
    throw Error("rate limiter: rate must be positive");
  impl_->rate = rate_per_sec;
  impl_->capacity = std::max(1.0, capacity);
  impl_->tokens = impl_->capacity;
  impl_->last_refill = std::chrono::steady_clock::now();
}

void RateLimiter::acquire() {
  using clock = std::chrono::steady_clock;
  while (true) {
    double wait_s = 0.0;
    {
      std::lock_guard lock(impl_->mutex);
      auto now = clock::now();
      double elapsed = std::chrono::duration<double>(now - impl_->last_refill).count();
      impl_->tokens = std::min(impl_->capacity, impl_->tokens + elapsed * impl_->rate);
      impl_->last_refill = now;
      if (impl_->tokens >= 1.0) {
        impl_->tokens -= 1.0;
        return;
      }
      wait_s = (1.0 - impl_->tokens) / impl_->rate;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
  }
}

int64_t ProbeTransport::now_epoch_ms() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

PortOutcome RealTransport::probe(uint32_t address, uint16_t port, uint32_t /*run_id*/,
                                 uint32_t attempt, int timeout_ms) {
  PortOutcome outcome;
  outcome.attempts = attempt;

  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_NONBLOCK, 0);
  if (fd < 0) {
    outcome.kind = OutcomeKind::TIMEOUT;
    outcome.error = std::string("socket: ") + std::strerror(errno);
    return outcome;
  }

  sockaddr_in sin{};
  sin.sin_family = AF_INET;
  sin.sin_port = htons(port);
  sin.sin_addr.s_addr = htonl(address);

  auto started = std::chrono::steady_clock::now();
  int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&sin), sizeof sin);
  if (rc == 0) {
    outcome.kind = OutcomeKind::SYN_ACK;
    outcome.rtt_ms = 0.0;
    ::close(fd);
    return outcome;
  }
  if (errno != EINPROGRESS) {
    outcome.kind = OutcomeKind::TIMEOUT;
    outcome.error = std::string("connect: ") + std::strerror(errno);
    ::close(fd);
    return outcome;
  }

  pollfd pfd{fd, POLLOUT, 0};
  rc = ::poll(&pfd, 1, timeout_ms);
  auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                           started)
                     .count();
  if (rc == 0) {
    outcome.kind = OutcomeKind::TIMEOUT;
  } else if (rc < 0) {
    outcome.kind = OutcomeKind::TIMEOUT;
    outcome.error = std::string("poll: ") + std::strerror(errno);
  } else {
    int soerr = 0;
    socklen_t len = sizeof soerr;
    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &soerr, &len);
    if (soerr == 0) {
      outcome.kind = OutcomeKind::SYN_ACK;
      outcome.rtt_ms = elapsed;
    } else if (soerr == ECONNREFUSED || soerr == ECONNRESET) {
      outcome.kind = OutcomeKind::RST;
      outcome.rtt_ms = elapsed;
    } else if (soerr == EHOSTUNREACH || soerr == ENETUNREACH) {
      outcome.kind = OutcomeKind::ICMP_UNREACHABLE;
    } else if (soerr == ETIMEDOUT) {
      outcome.kind = OutcomeKind::TIMEOUT;
    } else {
      outcome.kind = OutcomeKind::TIMEOUT;
      outcome.error = std::string("connect: ") + std::strerror(soerr);
    }
  }
  ::close(fd);
  return outcome;
}

namespace {

PortOutcome probe_with_retry(ProbeTransport& transport, RateLimiter& limiter, uint32_t address,
                             uint16_t port, const SweepPolicy& policy) {
  PortOutcome outcome;
  for (int attempt = 1; attempt <= 1 + policy.retries; ++attempt) {
    limiter.acquire();
    outcome = transport.probe(address, port, policy.run_id, static_cast<uint32_t>(attempt),
                              policy.timeout_ms);
    outcome.attempts = static_cast<uint32_t>(attempt);
    if (outcome.kind != OutcomeKind::TIMEOUT)
      break;
  }
  if (outcome.kind == OutcomeKind::TIMEOUT)
    outcome.rtt_ms.reset(); // timeouts never carry an rtt
  return outcome;
}

} // namespace

std::vector<ProbeObservation> sweep(const std::vector<ProbeTarget>& targets,
                                    ProbeTransport& transport, const SweepPolicy& policy) {
  if (policy.rate_pps <= 0)
    throw Error("sweep: probes-per-second cap must be positive");
  if (policy.max_in_flight < 1)
    throw Error("sweep: max_in_flight must be at least 1");
  transport.setup();

  std::vector<ProbeObservation> observations(targets.size());
  if (targets.empty())
    return observations;

  RateLimiter limiter(policy.rate_pps, std::min<double>(policy.rate_pps, policy.max_in_flight));

  struct Task {
    size_t target_index;
    uint16_t port;
  };
  std::vector<Task> tasks;
  for (size_t i = 0; i < targets.size(); ++i) {
    observations[i].prefix = targets[i].prefix;
    observations[i].vantage_id = policy.vantage_id;
    observations[i].run_id = policy.run_id;
    observations[i].started_at_ms = transport.now_epoch_ms();
    for (uint16_t port : targets[i].ports)
      tasks.push_back({i, port});
  }

  std::atomic<size_t> next_task{0};
  std::mutex results_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (true) {
      size_t index = next_task.fetch_add(1);
      if (index >= tasks.size())
        return;
      const Task& task = tasks[index];
      try {
        PortOutcome outcome = probe_with_retry(transport, limiter,
                                               targets[task.target_index].target_address,
                                               task.port, policy);
        std::lock_guard lock(results_mutex);
        observations[task.target_index].outcomes[task.port] = std::move(outcome);
      } catch (...) {
        std::lock_guard lock(results_mutex);
        if (!first_error)
          first_error = std::current_exception();
        return;
      }
    }
  };

  size_t thread_count = std::min<size_t>(static_cast<size_t>(policy.max_in_flight), tasks.size());
  std::vector<std::thread> pool;
  pool.reserve(thread_count);
  for (size_t i = 0; i < thread_count; ++i)
    pool.emplace_back(worker);
  for (auto& thread : pool)
    thread.join();
  if (first_error)
    std::rethrow_exception(first_error);
  return observations;
}

namespace {

nlohmann::ordered_json outcome_to_json(const PortOutcome& outcome) {
  nlohmann::ordered_json j;
  j["outcome"] = to_string(outcome.kind);
  if (outcome.rtt_ms)
    j["rtt_ms"] = *outcome.rtt_ms;
  j["attempts"] = outcome.attempts;
  if (outcome.error)
    j["error"] = *outcome.error;
  return j;
}

PortOutcome outcome_from_json(const nlohmann::json& j) {
  PortOutcome outcome;
  outcome.kind = outcome_from_string(j.at("outcome").get<std::string>());
  if (j.contains("rtt_ms"))
    outcome.rtt_ms = j.at("rtt_ms").get<double>();
  outcome.attempts = j.value("attempts", 1u);
  if (j.contains("error"))
    outcome.error = j.at("error").get<std::string>();
  return outcome;
}

} // namespace

void write_observations_jsonl(const std::vector<ProbeObservation>& observations,
                              std::ostream& out) {
  for (const auto& obs : observations) {
    nlohmann::ordered_json j;
    j["prefix"] = obs.prefix.to_string();
    j["vantage"] = obs.vantage_id;
    j["run"] = obs.run_id;
    j["started_at_ms"] = obs.started_at_ms;
    auto& outcomes = j["outcomes"] = nlohmann::ordered_json::object();
    for (const auto& [port, outcome] : obs.outcomes)
      outcomes[std::to_string(port)] = outcome_to_json(outcome);
    out << j.dump() << '\n';
  }
}

std::vector<ProbeObservation> read_observations_jsonl(std::istream& in) {
  std::vector<ProbeObservation> observations;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty())
      continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      ProbeObservation obs;
      auto prefix = parse_prefix(j.at("prefix").get<std::string>());
      if (!prefix)
        throw Error("bad prefix");
      obs.prefix = *prefix;
      obs.vantage_id = j.at("vantage").get<std::string>();
      obs.run_id = j.at("run").get<uint32_t>();
      obs.started_at_ms = j.value("started_at_ms", int64_t{0});
      for (const auto& [port, outcome] : j.at("outcomes").items())
        obs.outcomes[static_cast<uint16_t>(std::stoul(port))] = outcome_from_json(outcome);
      observations.push_back(std::move(obs));
    } catch (const std::exception& e) {
      throw Error("observation line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return observations;
}

} // namespace outagekit::probe
