#include "outagekit/ascomp.hpp"

#include "outagekit/dates.hpp"
#include "outagekit/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace outagekit::ascomp {

std::string to_string(Category c) {
  switch (c) {
    case Category::state_telecom: return "state_telecom";
    case Category::mobile: return "mobile";
    case Category::mobile_infra: return "mobile_infra";
    case Category::commercial_isp: return "commercial_isp";
    case Category::academic: return "academic";
    case Category::cdn: return "cdn";
    case Category::other: return "other";
  }
  return "other";
}

Category category_from_string(const std::string& name) {
  for (Category c : kAllCategories)
    if (to_string(c) == name)
      return c;
  return Category::other;
}

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

} // namespace

AsRecord categorize(Asn asn, const std::string& name,
                    const std::optional<std::string>& metadata_category,
                    const std::vector<KeywordRule>& keyword_rules,
                    const std::map<Asn, Category>& overrides) {
  AsRecord record;
  record.asn = asn;
  record.name = name;
  if (auto it = overrides.find(asn); it != overrides.end()) {
    record.category = it->second;
    record.source = CategorySource::override_entry;
    return record;
  }
  std::string haystack = to_lower(name);
  for (const auto& rule : keyword_rules) {
    if (haystack.find(to_lower(rule.pattern)) != std::string::npos) {
      record.category = rule.category;
      record.source = CategorySource::keyword;
      return record;
    }
  }
  record.source = CategorySource::metadata;
  record.category =
      metadata_category ? category_from_string(*metadata_category) : Category::other;
  return record;
}

std::vector<CompositionCell> composition(const PerAsCounts& counts,
                                         const std::map<Asn, AsRecord>& records) {
  std::set<Asn> unknown;
  for (const auto& [key, hosts] : counts)
    if (!records.count(key.second))
      unknown.insert(key.second);
  if (!unknown.empty()) {
    std::string list;
    for (Asn asn : unknown)
      list += (list.empty() ? "" : ", ") + std::string("AS") + std::to_string(asn);
    throw Error("composition: no AS record for " + list);
  }

  std::map<std::string, std::map<Category, uint64_t>> sums;
  std::map<std::string, uint64_t> totals;
  for (const auto& [key, hosts] : counts) {
    sums[key.first][records.at(key.second).category] += hosts;
    totals[key.first] += hosts;
  }

  std::vector<CompositionCell> cells;
  for (const auto& [date, by_category] : sums) {
    for (Category category : kAllCategories) {
      CompositionCell cell;
      cell.date = date;
      cell.category = category;
      auto it = by_category.find(category);
      cell.hosts = it == by_category.end() ? 0 : it->second;
      cell.share = totals[date] == 0
                       ? 0.0
                       : static_cast<double>(cell.hosts) / static_cast<double>(totals[date]);
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<ExemptionFinding> exemptions(const PerAsCounts& counts,
                                         const std::string& baseline_date,
                                         const std::vector<std::string>& event_dates,
                                         double threshold, std::vector<Asn>* skipped) {
  std::set<Asn> candidates;
  for (const auto& [key, hosts] : counts)
    if (key.first == baseline_date)
      candidates.insert(key.second);

  auto count_at = [&](const std::string& date, Asn asn) -> uint64_t {
    auto it = counts.find({date, asn});
    return it == counts.end() ? 0 : it->second;
  };

  std::vector<ExemptionFinding> findings;
  for (Asn asn : candidates) {
    uint64_t baseline = count_at(baseline_date, asn);
    if (baseline == 0) {
      if (skipped)
        skipped->push_back(asn);
      continue;
    }
    ExemptionFinding finding;
    finding.asn = asn;
    finding.baseline_hosts = baseline;
    finding.exempt = !event_dates.empty();
    bool first = true;
    for (const auto& date : event_dates) {
      uint64_t hosts = count_at(date, asn);
      if (first || hosts < finding.min_event_hosts)
        finding.min_event_hosts = hosts;
      first = false;
      double date_retention = static_cast<double>(hosts) / static_cast<double>(baseline);
      if (date_retention < threshold)
        finding.exempt = false;
    }
    finding.retention =
        static_cast<double>(finding.min_event_hosts) / static_cast<double>(baseline);
    findings.push_back(finding);
  }
  std::sort(findings.begin(), findings.end(), [](const auto& a, const auto& b) {
    if (a.retention != b.retention)
      return a.retention > b.retention;
    return a.asn < b.asn;
  });
  return findings;
}

RecoveryAttribution recovery_attribution(const PerAsCounts& counts,
                                         const std::string& floor_date,
                                         const std::string& recovery_date,
                                         const std::map<Asn, AsRecord>& records) {
  if (floor_date == recovery_date)
    throw Error("recovery_attribution: floor and recovery dates are identical (" + floor_date +
                ")");

  std::map<Category, int64_t> category_deltas;
  std::map<Asn, std::pair<uint64_t, uint64_t>> per_as; // asn -> (from, to)
  bool saw_from = false, saw_to = false;
  for (const auto& [key, hosts] : counts) {
    if (key.first == floor_date) {
      per_as[key.second].first = hosts;
      saw_from = true;
    } else if (key.first == recovery_date) {
      per_as[key.second].second = hosts;
      saw_to = true;
    }
  }
  if (!saw_from)
    throw Error("recovery_attribution: no counts at " + floor_date);
  if (!saw_to)
    throw Error("recovery_attribution: no counts at " + recovery_date);

  for (const auto& [asn, fromto] : per_as) {
    auto it = records.find(asn);
    if (it == records.end())
      throw Error("recovery_attribution: no AS record for AS" + std::to_string(asn));
    category_deltas[it->second.category] +=
        static_cast<int64_t>(fromto.second) - static_cast<int64_t>(fromto.first);
  }

  RecoveryAttribution result;
  result.from_date = floor_date;
  result.to_date = recovery_date;

  int64_t positive_sum = 0;
  bool any_change = false;
  for (const auto& [category, delta] : category_deltas) {
    result.total_delta += delta;
    if (delta > 0)
      positive_sum += delta;
    if (delta != 0)
      any_change = true;
  }
  if (!any_change) {
    result.empty = true;
    return result;
  }

  for (Category category : kAllCategories) {
    auto it = category_deltas.find(category);
    int64_t delta = it == category_deltas.end() ? 0 : it->second;
    CategoryDelta cd;
    cd.category = category;
    cd.delta = delta;
    if (delta > 0 && positive_sum > 0)
      cd.share_of_positive = static_cast<double>(delta) / static_cast<double>(positive_sum);
    cd.anti_correlated = delta < 0 && result.total_delta > 0;
    result.categories.push_back(cd);
  }

  for (const auto& [asn, fromto] : per_as) {
    AsDelta ad;
    ad.asn = asn;
    ad.delta = static_cast<int64_t>(fromto.second) - static_cast<int64_t>(fromto.first);
    if (fromto.first > 0)
      ad.growth_multiplier = static_cast<double>(fromto.second) / static_cast<double>(fromto.first);
    else if (fromto.second > 0)
      ad.new_entry = true; // "new", never an infinite multiplier
    ad.anti_correlated = ad.delta < 0 && result.total_delta > 0;
    result.ases.push_back(ad);
  }
  std::sort(result.ases.begin(), result.ases.end(), [](const AsDelta& a, const AsDelta& b) {
    if (a.delta != b.delta)
      return a.delta > b.delta;
    return a.asn < b.asn;
  });
  return result;
}

PerAsCounts read_counts_csv(std::istream& in) {
  PerAsCounts counts;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    if (line_number == 1 && line.rfind("date,", 0) == 0)
      continue;
    std::stringstream ss(line);
    std::string date, asn_text, hosts_text;
    if (!std::getline(ss, date, ',') || !std::getline(ss, asn_text, ',') ||
        !std::getline(ss, hosts_text, ','))
      throw Error("counts line " + std::to_string(line_number) + ": expected date,asn,hosts");
    if (!dates::is_valid(date))
      throw Error("counts line " + std::to_string(line_number) + ": bad date '" + date + "'");
    uint64_t asn = 0, hosts = 0;
    auto parse = [&](const std::string& text, uint64_t& out, const char* what) {
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
      if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error("counts line " + std::to_string(line_number) + ": bad " + what);
    };
    parse(asn_text, asn, "asn");
    parse(hosts_text, hosts, "hosts");
    counts[{date, static_cast<Asn>(asn)}] += hosts;
  }
  return counts;
}

PerAsCounts read_counts_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open counts file: " + path);
  return read_counts_csv(in);
}

std::map<Asn, MetadataEntry> read_metadata_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open metadata file: " + path);
  std::map<Asn, MetadataEntry> metadata;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    if (line_number == 1 && line.rfind("asn,", 0) == 0)
      continue;
    std::stringstream ss(line);
    std::string asn_text, name, category;
    std::getline(ss, asn_text, ',');
    std::getline(ss, name, ',');
    std::getline(ss, category, ',');
    uint64_t asn = 0;
    auto [ptr, ec] = std::from_chars(asn_text.data(), asn_text.data() + asn_text.size(), asn);
    if (ec != std::errc{} || ptr != asn_text.data() + asn_text.size())
      throw Error("metadata line " + std::to_string(line_number) + ": bad asn '" + asn_text +
                  "'");
    MetadataEntry entry;
    entry.name = name;
    if (!category.empty())
      entry.category = category;
    metadata[static_cast<Asn>(asn)] = std::move(entry);
  }
  return metadata;
}

std::vector<KeywordRule> read_rules_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open keyword rules file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  std::vector<KeywordRule> rules;
  for (const auto& item : doc) {
    KeywordRule rule;
    rule.pattern = item.at("pattern").get<std::string>();
    rule.category = category_from_string(item.at("category").get<std::string>());
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::map<Asn, Category> read_overrides_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open overrides file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  std::map<Asn, Category> overrides;
  for (const auto& [asn_text, category] : doc.items())
    overrides[static_cast<Asn>(std::stoul(asn_text))] =
        category_from_string(category.get<std::string>());
  return overrides;
}

std::map<Asn, AsRecord> build_records(const PerAsCounts& counts,
                                      const std::map<Asn, MetadataEntry>& metadata,
                                      const std::vector<KeywordRule>& keyword_rules,
                                      const std::map<Asn, Category>& overrides) {
  std::map<Asn, AsRecord> records;
  for (const auto& [key, hosts] : counts) {
    Asn asn = key.second;
    if (records.count(asn))
      continue;
    auto it = metadata.find(asn);
    std::string name = it == metadata.end() ? "" : it->second.name;
    std::optional<std::string> category =
        it == metadata.end() ? std::nullopt : it->second.category;
    records[asn] = categorize(asn, name, category, keyword_rules, overrides);
  }
  return records;
}

void export_composition_csv(const std::vector<CompositionCell>& cells, std::ostream& out) {
  out << "date,category,hosts,share_pct\n";
  char share[32];
  for (const auto& cell : cells) {
    std::snprintf(share, sizeof share, "%.1f", cell.share * 100.0);
    out << cell.date << ',' << to_string(cell.category) << ',' << cell.hosts << ',' << share
        << '\n';
  }
}

void export_findings_json(const std::vector<ExemptionFinding>& exemption_findings,
                          const RecoveryAttribution& attribution, double exemption_threshold,
                          std::ostream& out) {
  nlohmann::ordered_json doc;
  auto round4 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::stod(buf);
  };
  doc["exemption_threshold"] = exemption_threshold;
  auto& exempt_list = doc["exemptions"] = nlohmann::ordered_json::array();
  for (const auto& finding : exemption_findings) {
    exempt_list.push_back({{"asn", finding.asn},
                           {"baseline_hosts", finding.baseline_hosts},
                           {"min_event_hosts", finding.min_event_hosts},
                           {"retention", round4(finding.retention)},
                           {"exempt", finding.exempt}});
  }
  auto& attr = doc["recovery_attribution"];
  attr["from_date"] = attribution.from_date;
  attr["to_date"] = attribution.to_date;
  attr["total_delta"] = attribution.total_delta;
  attr["empty"] = attribution.empty;
  auto& categories = attr["categories"] = nlohmann::ordered_json::array();
  for (const auto& cd : attribution.categories) {
    nlohmann::ordered_json item;
    item["category"] = to_string(cd.category);
    item["delta"] = cd.delta;
    if (cd.share_of_positive)
      item["share_of_positive"] = round4(*cd.share_of_positive);
    item["anti_correlated"] = cd.anti_correlated;
    categories.push_back(item);
  }
  auto& ases = attr["ases"] = nlohmann::ordered_json::array();
  for (const auto& ad : attribution.ases) {
    nlohmann::ordered_json item;
    item["asn"] = ad.asn;
    item["delta"] = ad.delta;
    if (ad.growth_multiplier)
      item["growth_multiplier"] = round4(*ad.growth_multiplier);
    if (ad.new_entry)
      item["new_entry"] = true;
    item["anti_correlated"] = ad.anti_correlated;
    ases.push_back(item);
  }
  out << doc.dump(2) << '\n';
}

} // namespace outagekit::ascomp
