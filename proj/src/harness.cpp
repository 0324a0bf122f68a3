#include "outagekit/harness.hpp"

#include "outagekit/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

namespace outagekit::harness {

void TransportScript::add(const Key& key, const probe::PortOutcome& outcome) {
  entries_[key] = outcome;
}

probe::PortOutcome TransportScript::lookup(uint32_t run, uint32_t address, uint16_t port,
                                           uint32_t attempt) const {
  Key key{static_cast<int32_t>(run), address, port, static_cast<int32_t>(attempt)};
  if (auto it = entries_.find(key); it != entries_.end())
    return it->second;
  key.run = -1;
  if (auto it = entries_.find(key); it != entries_.end())
    return it->second;
  key.attempt = -1;
  if (auto it = entries_.find(key); it != entries_.end())
    return it->second;
  key.run = static_cast<int32_t>(run);
  if (auto it = entries_.find(key); it != entries_.end())
    return it->second;
  probe::PortOutcome timeout;
  timeout.kind = probe::OutcomeKind::TIMEOUT;
  return timeout;
}

void TransportScript::write_jsonl(std::ostream& out) const {
  for (const auto& [key, outcome] : entries_) {
    nlohmann::ordered_json j;
    j["address"] = format_ipv4(key.address);
    j["port"] = key.port;
    if (key.run >= 0)
      j["run"] = key.run;
    if (key.attempt >= 0)
      j["attempt"] = key.attempt;
    j["outcome"] = probe::to_string(outcome.kind);
    if (outcome.rtt_ms)
      j["rtt_ms"] = *outcome.rtt_ms;
    out << j.dump() << '\n';
  }
}

TransportScript TransportScript::read_jsonl(std::istream& in) {
  TransportScript script;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty())
      continue;
    try {
      auto j = nlohmann::json::parse(line);
      Key key;
      auto address = parse_ipv4(j.at("address").get<std::string>());
      if (!address)
        throw Error("bad address");
      key.address = *address;
      key.port = j.at("port").get<uint16_t>();
      key.run = j.value("run", -1);
      key.attempt = j.value("attempt", -1);
      probe::PortOutcome outcome;
      outcome.kind = probe::outcome_from_string(j.at("outcome").get<std::string>());
      if (j.contains("rtt_ms"))
        outcome.rtt_ms = j.at("rtt_ms").get<double>();
      script.add(key, outcome);
    } catch (const std::exception& e) {
      throw Error("script line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return script;
}

TransportScript TransportScript::read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open transport script: " + path);
  return read_jsonl(in);
}

struct ReplayTransport::State {
  TransportScript script;
  std::mutex mutex;
  int64_t virtual_clock_ms = 0;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  std::vector<SendLogEntry> log;
};

ReplayTransport::ReplayTransport(TransportScript script) : state_(std::make_shared<State>()) {
  state_->script = std::move(script);
}

probe::PortOutcome ReplayTransport::probe(uint32_t address, uint16_t port, uint32_t run_id,
                                          uint32_t attempt, int /*timeout_ms*/) {
  {
    std::lock_guard lock(state_->mutex);
    state_->log.push_back(
        {std::chrono::duration<double>(std::chrono::steady_clock::now() - state_->t0).count(),
         address, port});
  }
  probe::PortOutcome outcome = state_->script.lookup(run_id, address, port, attempt);
  outcome.attempts = attempt;
  return outcome;
}

int64_t ReplayTransport::now_epoch_ms() const {
  std::lock_guard lock(state_->mutex);
  return state_->virtual_clock_ms++;
}

std::vector<ReplayTransport::SendLogEntry> ReplayTransport::send_log() const {
  std::lock_guard lock(state_->mutex);
  return state_->log;
}

std::array<probe::OutcomeKind, 3> canonical_triple(verdicts::Verdict verdict) {
  using K = probe::OutcomeKind;
  using V = verdicts::Verdict;
  switch (verdict) {
    case V::NULL_ROUTE: return {K::TIMEOUT, K::TIMEOUT, K::TIMEOUT};
    case V::REACHABLE: return {K::SYN_ACK, K::TIMEOUT, K::TIMEOUT};
    case V::BGP_WITHDRAW: return {K::TIMEOUT, K::ICMP_UNREACHABLE, K::TIMEOUT};
    case V::FIREWALL_ACL: return {K::TIMEOUT, K::TIMEOUT, K::RST};
    case V::AMBIGUOUS:
      throw Error("canonical_triple: AMBIGUOUS has no single representative triple");
  }
  throw Error("canonical_triple: bad verdict");
}

namespace {

// splitmix64; keeps plan expansion independent of library RNG details.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t bound) { return bound == 0 ? 0 : next() % bound; }
};

const std::array<verdicts::Verdict, 3> kAmbiguousCycle = {
    verdicts::Verdict::NULL_ROUTE, verdicts::Verdict::REACHABLE,
    verdicts::Verdict::BGP_WITHDRAW};

} // namespace

std::vector<TransportScript> script_from_plan(const GroundTruthPlan& plan, uint32_t runs) {
  if (plan.noise_rate < 0.0 || plan.noise_rate >= 0.5)
    throw Error("script_from_plan: noise rate must lie in [0, 0.5)");
  if (runs == 0)
    throw Error("script_from_plan: need at least one run");

  std::vector<TransportScript> scripts(runs);
  const uint16_t ports[3] = {80, 443, 179};
  Rng rng(plan.seed);

  auto plant = [&](uint32_t run, uint32_t address, verdicts::Verdict verdict) {
    auto triple = canonical_triple(verdict);
    for (int i = 0; i < 3; ++i) {
      probe::PortOutcome outcome;
      outcome.kind = triple[i];
      if (outcome.kind == probe::OutcomeKind::SYN_ACK || outcome.kind == probe::OutcomeKind::RST)
        outcome.rtt_ms = 20.0 + static_cast<double>(rng.below(60));
      scripts[run].add({-1, address, ports[i], -1}, outcome);
    }
  };

  for (const auto& [prefix, verdict] : plan.planted) {
    uint32_t address = probe::derive_target(prefix).target_address;
    if (verdict == verdicts::Verdict::AMBIGUOUS) {
      // Cycle three triples; each count stays at or below runs/3 + 1,
      // which cannot reach a strict majority for runs >= 2.
      for (uint32_t run = 0; run < runs; ++run)
        plant(run, address, kAmbiguousCycle[run % kAmbiguousCycle.size()]);
      continue;
    }
    // A fixed noised-run count below half keeps recovery deterministic.
    uint32_t noised = static_cast<uint32_t>(plan.noise_rate * runs);
    std::vector<uint32_t> run_order(runs);
    for (uint32_t i = 0; i < runs; ++i)
      run_order[i] = i;
    for (uint32_t i = runs; i > 1; --i)
      std::swap(run_order[i - 1], run_order[rng.below(i)]);
    for (uint32_t i = 0; i < runs; ++i) {
      verdicts::Verdict run_verdict = verdict;
      if (i < noised) {
        std::vector<verdicts::Verdict> others;
        for (verdicts::Verdict v :
             {verdicts::Verdict::NULL_ROUTE, verdicts::Verdict::REACHABLE,
              verdicts::Verdict::BGP_WITHDRAW, verdicts::Verdict::FIREWALL_ACL})
          if (v != verdict)
            others.push_back(v);
        run_verdict = others[rng.below(others.size())];
      }
      plant(run_order[i], address, run_verdict);
    }
  }
  return scripts;
}

TransportScript merged_script(const std::vector<TransportScript>& per_run) {
  TransportScript merged;
  for (size_t run = 0; run < per_run.size(); ++run) {
    std::ostringstream buffer;
    per_run[run].write_jsonl(buffer);
    std::istringstream lines(buffer.str());
    std::string line;
    while (std::getline(lines, line)) {
      auto j = nlohmann::json::parse(line);
      TransportScript::Key key;
      key.address = *parse_ipv4(j.at("address").get<std::string>());
      key.port = j.at("port").get<uint16_t>();
      key.run = static_cast<int32_t>(run);
      key.attempt = j.value("attempt", -1);
      probe::PortOutcome outcome;
      outcome.kind = probe::outcome_from_string(j.at("outcome").get<std::string>());
      if (j.contains("rtt_ms"))
        outcome.rtt_ms = j.at("rtt_ms").get<double>();
      merged.add(key, outcome);
    }
  }
  return merged;
}

namespace {

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put_record(std::vector<uint8_t>& out, uint16_t type, uint16_t subtype,
                const std::vector<uint8_t>& body) {
  put_u32(out, 0); // timestamp
  put_u16(out, type);
  put_u16(out, subtype);
  put_u32(out, static_cast<uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
}

// AS_PATH for one entry: an AS_SEQUENCE, with a trailing AS_SET when
// the origin set is not just the last path hop.
std::vector<uint8_t> encode_as_path(const mrt::RouteEntry& entry) {
  std::vector<uint8_t> value;
  const auto& path = entry.path;
  const auto& origin = entry.origin;
  if (path.empty()) {
    if (!origin.empty())
      throw Error("synth_rib: entry has an origin but an empty path");
    return value;
  }
  bool plain_sequence = origin.size() == 1 && *origin.begin() == path.back();
  size_t set_size = 0;
  if (!plain_sequence) {
    set_size = origin.size();
    if (set_size > path.size())
      throw Error("synth_rib: origin set larger than the path");
    std::set<mrt::Asn> tail(path.end() - static_cast<ptrdiff_t>(set_size), path.end());
    if (tail != origin)
      throw Error("synth_rib: origin set does not match the path tail");
  }
  size_t sequence_len = path.size() - set_size;
  if (sequence_len > 255 || set_size > 255)
    throw Error("synth_rib: path segment longer than 255 ASNs");
  if (sequence_len > 0) {
    value.push_back(2); // AS_SEQUENCE
    value.push_back(static_cast<uint8_t>(sequence_len));
    for (size_t i = 0; i < sequence_len; ++i)
      put_u32(value, path[i]);
  }
  if (set_size > 0) {
    value.push_back(1); // AS_SET
    value.push_back(static_cast<uint8_t>(set_size));
    for (size_t i = sequence_len; i < path.size(); ++i)
      put_u32(value, path[i]);
  }
  return value;
}

} // namespace

std::vector<uint8_t> synth_rib(const std::vector<mrt::RouteEntry>& entries,
                               const std::vector<SynthPeer>& peers) {
  std::vector<uint8_t> out;

  std::vector<uint8_t> peer_table;
  put_u32(peer_table, 0x0a000001); // collector BGP id
  put_u16(peer_table, 0);         // empty view name
  put_u16(peer_table, static_cast<uint16_t>(peers.size()));
  for (const auto& peer : peers) {
    uint8_t peer_type = (peer.ipv6 ? 0x01 : 0x00) | (peer.wide_asn ? 0x02 : 0x00);
    peer_table.push_back(peer_type);
    put_u32(peer_table, 0xc0000200 + peer.asn % 251); // peer BGP id
    if (peer.ipv6)
      for (int i = 0; i < 16; ++i)
        peer_table.push_back(static_cast<uint8_t>(i));
    else
      put_u32(peer_table, 0xc0000201);
    if (peer.wide_asn)
      put_u32(peer_table, peer.asn);
    else
      put_u16(peer_table, static_cast<uint16_t>(peer.asn));
  }
  put_record(out, 13, 1, peer_table);

  uint32_t sequence = 0;
  size_t i = 0;
  while (i < entries.size()) {
    size_t j = i;
    while (j < entries.size() && entries[j].prefix == entries[i].prefix)
      ++j;
    const Ipv4Prefix& prefix = entries[i].prefix;
    std::vector<uint8_t> body;
    put_u32(body, sequence++);
    body.push_back(prefix.length);
    size_t nbytes = (prefix.length + 7) / 8;
    for (size_t b = 0; b < nbytes; ++b)
      body.push_back(static_cast<uint8_t>(prefix.addr >> (24 - 8 * b)));
    put_u16(body, static_cast<uint16_t>(j - i));
    for (size_t k = i; k < j; ++k) {
      const auto& entry = entries[k];
      if (!peers.empty() && entry.peer_index >= peers.size())
        throw Error("synth_rib: peer index " + std::to_string(entry.peer_index) +
                    " out of range");
      put_u16(body, static_cast<uint16_t>(entry.peer_index));
      put_u32(body, 0); // originated time
      auto as_path = encode_as_path(entry);
      std::vector<uint8_t> attrs;
      if (!as_path.empty()) {
        attrs.push_back(0x50); // transitive + extended length
        attrs.push_back(2);    // AS_PATH
        put_u16(attrs, static_cast<uint16_t>(as_path.size()));
        attrs.insert(attrs.end(), as_path.begin(), as_path.end());
      }
      put_u16(body, static_cast<uint16_t>(attrs.size()));
      body.insert(body.end(), attrs.begin(), attrs.end());
    }
    put_record(out, 13, 2, body);
    i = j;
  }
  return out;
}

std::vector<uint8_t> synth_rib(const std::vector<mrt::RouteEntry>& entries) {
  uint32_t max_peer = 0;
  for (const auto& entry : entries)
    max_peer = std::max(max_peer, entry.peer_index);
  std::vector<SynthPeer> peers;
  for (uint32_t p = 0; p <= max_peer; ++p)
    peers.push_back({64512 + p, p % 2 == 1, false});
  return synth_rib(entries, peers);
}

std::set<Ipv4Prefix> coverage_oracle(const std::vector<registry::AllocatedPrefix>& allocated,
                                     const std::set<Ipv4Prefix>& announced) {
  std::set<Ipv4Prefix> covered;
  for (const auto& alloc : allocated) {
    uint64_t alloc_first = alloc.cidr.first_address();
    uint64_t alloc_last = alloc.cidr.last_address();
    for (const auto& ann : announced) {
      uint64_t ann_first = ann.first_address();
      uint64_t ann_last = ann.last_address();
      bool contains = ann_first <= alloc_first && ann_last >= alloc_last;
      bool contained = ann_first >= alloc_first && ann_last <= alloc_last;
      if (contains || contained) {
        covered.insert(alloc.cidr);
        break;
      }
    }
  }
  return covered;
}

} // namespace outagekit::harness
