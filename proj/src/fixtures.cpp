#include "outagekit/fixtures.hpp"

#include "outagekit/error.hpp"
#include "outagekit/registry.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace outagekit::fixtures {

namespace {

struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed ^ 0x6a09e667f3bcc909ull) {}
  uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t bound) { return bound == 0 ? 0 : next() % bound; }
};

template <typename T>
void seeded_shuffle(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i)
    std::swap(items[i - 1], items[rng.below(i)]);
}

} // namespace

std::vector<BgpEventSpec> load_bgp_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open scenario file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  std::vector<BgpEventSpec> events;
  for (const auto& item : doc.at("events")) {
    BgpEventSpec spec;
    spec.name = item.at("name").get<std::string>();
    spec.country = item.at("country").get<std::string>();
    spec.delegated_date = item.at("delegated_date").get<std::string>();
    spec.asn_start = item.at("asn_start").get<uint32_t>();
    spec.asn_total = item.at("asn_total").get<uint64_t>();
    auto base = parse_ipv4(item.at("ipv4_base").get<std::string>());
    if (!base)
      throw Error("scenario " + spec.name + ": bad ipv4_base");
    spec.ipv4_base = *base;
    spec.allocated_blocks = item.at("allocated_blocks").get<uint64_t>();
    spec.seed = item.at("seed").get<uint64_t>();
    for (const auto& d : item.at("dates")) {
      BgpDateSpec date;
      date.date = d.at("date").get<std::string>();
      date.event = d.at("event").get<std::string>();
      date.phase = d.at("phase").get<std::string>();
      date.announced = d.at("announced").get<uint64_t>();
      date.covered = d.at("covered").get<uint64_t>();
      if (date.covered > spec.allocated_blocks)
        throw Error("scenario " + spec.name + ": covered exceeds allocated universe on " +
                    date.date);
      if (date.announced < date.covered)
        throw Error("scenario " + spec.name + ": announced below covered on " + date.date);
      spec.dates.push_back(std::move(date));
    }
    events.push_back(std::move(spec));
  }
  return events;
}

namespace {

// The universe is mostly /20 blocks plus three count-768 allocations
// (each decomposing to a /23 and a /24) parked above them, so the
// delegated parser's interval decomposition is exercised end to end.
constexpr uint64_t kSmallBlockCount = 6;
constexpr uint32_t kBlockSpacing = 8192;

std::vector<Ipv4Prefix> universe_blocks(const BgpEventSpec& spec) {
  if (spec.allocated_blocks <= kSmallBlockCount)
    throw Error("scenario " + spec.name + ": allocated_blocks too small");
  std::vector<Ipv4Prefix> blocks;
  uint64_t wide = spec.allocated_blocks - kSmallBlockCount;
  for (uint64_t k = 0; k < wide; ++k)
    blocks.emplace_back(spec.ipv4_base + static_cast<uint32_t>(k) * kBlockSpacing, 20);
  uint32_t tail = spec.ipv4_base + 0x00f80000;
  for (int k = 0; k < 3; ++k) {
    uint32_t start = tail + static_cast<uint32_t>(k) * 4096 + 512;
    blocks.emplace_back(start, 23);
    blocks.emplace_back(start + 512, 24);
  }
  std::sort(blocks.begin(), blocks.end());
  return blocks;
}

// n-th distinct sub-prefix of `block` in level order, starting at the
// quarter-size level so generated extras never collide with a half-size
// primary announcement.
Ipv4Prefix nth_subprefix(const Ipv4Prefix& block, uint64_t n) {
  uint8_t level_len = block.length + 2;
  uint64_t level_count = 4;
  while (n >= level_count) {
    n -= level_count;
    ++level_len;
    level_count *= 2;
    if (level_len > 32)
      throw Error("nth_subprefix: block " + block.to_string() + " exhausted");
  }
  uint32_t stride = static_cast<uint32_t>(uint64_t{1} << (32 - level_len));
  return Ipv4Prefix{block.addr + static_cast<uint32_t>(n) * stride, level_len};
}

std::vector<mrt::Asn> country_asn_list(const BgpEventSpec& spec) {
  std::vector<mrt::Asn> asns;
  uint64_t singles = spec.asn_total - 18;
  for (uint64_t i = 0; i < singles; ++i)
    asns.push_back(spec.asn_start + static_cast<uint32_t>(i) * 3);
  for (uint32_t i = 0; i < 9; ++i)
    asns.push_back(spec.asn_start + 1000000 + i);
  for (uint32_t i = 0; i < 9; ++i)
    asns.push_back(spec.asn_start + 1000020 + i);
  return asns;
}

void write_delegated_file(const BgpEventSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write delegated fixture: " + path);
  std::string compact_date = spec.delegated_date;
  compact_date.erase(std::remove(compact_date.begin(), compact_date.end(), '-'),
                     compact_date.end());

  uint64_t singles = spec.asn_total - 18;
  uint64_t wide = spec.allocated_blocks - kSmallBlockCount;
  uint64_t asn_records = singles + 2;
  uint64_t ipv4_records = wide + 3 + 2; // + two foreign records
  out << "2|ripencc|" << compact_date << "|" << asn_records + ipv4_records + 1 << "|19840101|"
      << compact_date << "|+0100\n";
  out << "ripencc|*|asn|*|" << asn_records << "|summary\n";
  out << "ripencc|*|ipv4|*|" << ipv4_records << "|summary\n";
  out << "ripencc|*|ipv6|*|1|summary\n";

  const std::string& cc = spec.country;
  for (uint64_t i = 0; i < singles; ++i)
    out << "ripencc|" << cc << "|asn|" << spec.asn_start + i * 3 << "|1|" << compact_date
        << "|allocated|ok-" << i << "\n";
  out << "ripencc|" << cc << "|asn|" << spec.asn_start + 1000000 << "|9|" << compact_date
      << "|assigned|okA\n";
  out << "ripencc|" << cc << "|asn|" << spec.asn_start + 1000020 << "|9|" << compact_date
      << "|allocated|okB\n";
  // Foreign records the country filter must ignore.
  out << "ripencc|DE|asn|3320|1|" << compact_date << "|allocated|noise\n";
  out << "ripencc|NL|ipv4|193.0.0.0|65536|" << compact_date << "|allocated|noise\n";
  out << "ripencc|DE|ipv4|91.0.0.0|131072|" << compact_date << "|allocated|noise\n";
  // An ipv6 record the parser counts and skips.
  out << "ripencc|" << cc << "|ipv6|2a00:1450::|32|" << compact_date << "|allocated|v6\n";

  for (uint64_t k = 0; k < wide; ++k) {
    uint32_t start = spec.ipv4_base + static_cast<uint32_t>(k) * kBlockSpacing;
    out << "ripencc|" << cc << "|ipv4|" << format_ipv4(start) << "|4096|" << compact_date
        << "|" << (k % 7 == 3 ? "assigned" : "allocated") << "|blk-" << k << "\n";
  }
  uint32_t tail = spec.ipv4_base + 0x00f80000;
  for (int k = 0; k < 3; ++k) {
    uint32_t start = tail + static_cast<uint32_t>(k) * 4096 + 512;
    out << "ripencc|" << cc << "|ipv4|" << format_ipv4(start) << "|768|" << compact_date
        << "|allocated|tail-" << k << "\n";
  }
}

} // namespace

std::set<Ipv4Prefix> scenario_announced(const BgpEventSpec& spec, const BgpDateSpec& date) {
  auto blocks = universe_blocks(spec);
  std::set<Ipv4Prefix> announced;
  for (uint64_t k = 0; k < date.covered; ++k) {
    const Ipv4Prefix& block = blocks[k];
    if (k % 2 == 1 && block.length < 32)
      announced.insert(Ipv4Prefix{block.addr, static_cast<uint8_t>(block.length + 1)});
    else
      announced.insert(block);
  }
  uint64_t extras = date.announced - date.covered;
  std::vector<uint64_t> extra_counter(date.covered, 0);
  for (uint64_t e = 0; e < extras; ++e) {
    uint64_t k = e % date.covered;
    announced.insert(nth_subprefix(blocks[k], extra_counter[k]++));
  }
  if (announced.size() != date.announced)
    throw Error("scenario " + spec.name + ": announced construction collided on " + date.date);
  return announced;
}

BgpEventFiles write_bgp_event_fixtures(const BgpEventSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  BgpEventFiles files;
  files.delegated_path = (fs::path(out_dir) / ("delegated-" + spec.name + ".txt")).string();
  write_delegated_file(spec, files.delegated_path);

  auto asns = country_asn_list(spec);
  std::vector<harness::SynthPeer> peers;
  for (uint32_t p = 0; p < 12; ++p)
    peers.push_back({64500 + p, p % 3 == 1, p == 7});

  for (size_t date_index = 0; date_index < spec.dates.size(); ++date_index) {
    const auto& date = spec.dates[date_index];
    Rng rng(spec.seed * 1000003 + date_index);
    auto announced = scenario_announced(spec, date);

    std::vector<mrt::RouteEntry> entries;
    size_t n = 0;
    for (const auto& prefix : announced) {
      mrt::RouteEntry entry;
      entry.prefix = prefix;
      mrt::Asn origin = asns[(n * 13 + date_index) % asns.size()];
      entry.peer_index = static_cast<uint32_t>(rng.below(peers.size()));
      if (n == 1) {
        // One AS_SET-origin route per date keeps inclusive matching hot.
        mrt::Asn second = asns[(n * 13 + date_index + 7) % asns.size()];
        entry.path = {peers[entry.peer_index].asn, 6939, origin, second};
        entry.origin = {origin, second};
      } else {
        entry.path = {peers[entry.peer_index].asn, 6939, origin};
        entry.origin = {origin};
      }
      entries.push_back(entry);
      // A second peer for every fourth prefix: duplicates must survive
      // parsing and deduplicate in originated_prefixes.
      if (n % 4 == 0) {
        mrt::RouteEntry duplicate = entries.back();
        duplicate.peer_index = static_cast<uint32_t>(rng.below(peers.size()));
        duplicate.path[0] = peers[duplicate.peer_index].asn;
        entries.push_back(duplicate);
      }
      ++n;
    }
    // Foreign-origin noise, a default route, and an IPv6-peer route.
    for (uint32_t i = 0; i < 250; ++i) {
      mrt::RouteEntry entry;
      entry.prefix = Ipv4Prefix{0xB9000000 + i * 65536, 16}; // 185.x.0.0/16
      entry.peer_index = static_cast<uint32_t>(rng.below(peers.size()));
      mrt::Asn origin = 174 + i;
      entry.path = {peers[entry.peer_index].asn, 3356, origin};
      entry.origin = {origin};
      entries.push_back(entry);
    }
    {
      mrt::RouteEntry default_route;
      default_route.prefix = Ipv4Prefix{0, 0};
      default_route.peer_index = 3;
      default_route.path = {peers[3].asn, asns[0]};
      default_route.origin = {asns[0]};
      entries.push_back(default_route);
    }

    auto bytes = harness::synth_rib(entries, peers);
    bool gzip = date_index % 2 == 1;
    if (gzip)
      bytes = gzip_compress(bytes);
    std::string name = "bview-" + date.date + (gzip ? ".mrt.gz" : ".mrt");
    std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw Error("cannot write bview fixture: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    files.bview_paths[date.date] = path;
  }
  return files;
}

std::vector<Ipv4Prefix> make_probe_targets(size_t count) {
  std::vector<Ipv4Prefix> targets;
  targets.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    uint32_t stride = static_cast<uint32_t>(i) * 1024;
    switch (i % 5) {
      case 0: targets.emplace_back(0x05000000 + stride, 24); break;
      case 1: targets.emplace_back(0x1F000000 + stride, 23); break;
      case 2: targets.emplace_back(0x2E000000 + stride, 24); break;
      case 3: targets.emplace_back(0x4E000000 + stride, 22); break;
      default: targets.emplace_back(0x59000000 + stride, 24); break;
    }
  }
  return targets;
}

void write_probe_targets(const std::vector<Ipv4Prefix>& targets, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write targets file: " + path);
  for (const auto& prefix : targets)
    out << prefix.to_string() << '\n';
}

std::vector<Ipv4Prefix> read_probe_targets(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open targets file: " + path);
  std::vector<Ipv4Prefix> targets;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    auto prefix = parse_prefix(line);
    if (!prefix)
      throw Error("targets line " + std::to_string(line_number) + ": bad prefix '" + line + "'");
    targets.push_back(*prefix);
  }
  return targets;
}

PlanSpec load_plan_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open plan file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  PlanSpec spec;
  spec.vantage = doc.at("vantage").get<std::string>();
  spec.runs = doc.at("runs").get<uint32_t>();
  spec.seed = doc.at("seed").get<uint64_t>();
  spec.noise_rate = doc.at("noise_rate").get<double>();
  spec.targets_file = doc.at("targets_file").get<std::string>();
  for (const auto& [verdict, count] : doc.at("verdict_counts").items())
    spec.verdict_counts[verdict] = count.get<uint64_t>();
  return spec;
}

harness::GroundTruthPlan expand_plan(const PlanSpec& spec,
                                     const std::vector<Ipv4Prefix>& targets) {
  uint64_t total = 0;
  for (const auto& [verdict, count] : spec.verdict_counts)
    total += count;
  if (total != targets.size())
    throw Error("plan '" + spec.vantage + "': verdict counts sum to " + std::to_string(total) +
                " but there are " + std::to_string(targets.size()) + " targets");

  std::vector<Ipv4Prefix> shuffled = targets;
  Rng rng(spec.seed);
  seeded_shuffle(shuffled, rng);

  harness::GroundTruthPlan plan;
  plan.noise_rate = spec.noise_rate;
  plan.seed = spec.seed;
  size_t cursor = 0;
  for (verdicts::Verdict verdict : verdicts::kAllVerdicts) {
    auto it = spec.verdict_counts.find(verdicts::to_string(verdict));
    if (it == spec.verdict_counts.end())
      continue;
    for (uint64_t i = 0; i < it->second; ++i)
      plan.planted[shuffled[cursor++]] = verdict;
  }
  return plan;
}

std::vector<uint8_t> gzip_compress(const std::vector<uint8_t>& data) {
  z_stream strm{};
  if (deflateInit2(&strm, Z_BEST_SPEED, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw Error("gzip: deflateInit failed");
  std::vector<uint8_t> out(deflateBound(&strm, static_cast<uLong>(data.size())) + 32);
  strm.next_in = const_cast<Bytef*>(data.data());
  strm.avail_in = static_cast<uInt>(data.size());
  strm.next_out = out.data();
  strm.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&strm, Z_FINISH);
  deflateEnd(&strm);
  if (rc != Z_STREAM_END)
    throw Error("gzip: deflate failed");
  out.resize(out.size() - strm.avail_out);
  return out;
}

} // namespace outagekit::fixtures
