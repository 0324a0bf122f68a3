#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace outagekit::ascomp {

using Asn = uint32_t;

enum class Category : uint8_t {
  state_telecom,
  mobile,
  mobile_infra,
  commercial_isp,
  academic,
  cdn,
  other,
};

constexpr std::array<Category, 7> kAllCategories = {
    Category::state_telecom, Category::mobile,   Category::mobile_infra,
    Category::commercial_isp, Category::academic, Category::cdn,
    Category::other};

std::string to_string(Category c);
/// Unknown labels map to `other` to tolerate metadata drift.
Category category_from_string(const std::string& name);

enum class CategorySource : uint8_t { metadata, keyword, override_entry };

struct AsRecord {
  Asn asn = 0;
  std::string name;
  Category category = Category::other;
  CategorySource source = CategorySource::metadata;
};

struct KeywordRule {
  std::string pattern; // case-insensitive substring over the AS name
  Category category = Category::other;
};

/// Category assignment precedence: manual override, then the first
/// matching keyword rule, then the metadata label, then `other`.
AsRecord categorize(Asn asn, const std::string& name,
                    const std::optional<std::string>& metadata_category,
                    const std::vector<KeywordRule>& keyword_rules,
                    const std::map<Asn, Category>& overrides);

/// (date, asn) -> visible host count.
using PerAsCounts = std::map<std::pair<std::string, Asn>, uint64_t>;

struct CompositionCell {
  std::string date;
  Category category = Category::other;
  uint64_t hosts = 0;
  double share = 0.0;
};

/// Per-date, per-category sums and shares. Every ASN in `counts` must
/// have an AsRecord; unknown ASNs are a hard error listing offenders.
std::vector<CompositionCell> composition(const PerAsCounts& counts,
                                         const std::map<Asn, AsRecord>& records);

struct ExemptionFinding {
  Asn asn = 0;
  uint64_t baseline_hosts = 0;
  uint64_t min_event_hosts = 0;
  double retention = 0.0; // min event count over baseline; > 1 means growth
  bool exempt = false;    // retention >= threshold on every event date
};

constexpr double kDefaultExemptionThreshold = 0.95;

/// Retention per AS against the baseline date. ASes with a zero or
/// missing baseline count are skipped and reported in `skipped`.
/// Results are sorted by retention, highest first.
std::vector<ExemptionFinding> exemptions(const PerAsCounts& counts,
                                         const std::string& baseline_date,
                                         const std::vector<std::string>& event_dates,
                                         double threshold = kDefaultExemptionThreshold,
                                         std::vector<Asn>* skipped = nullptr);

struct CategoryDelta {
  Category category = Category::other;
  int64_t delta = 0;
  std::optional<double> share_of_positive; // only for positive deltas
  bool anti_correlated = false;            // fell while the total recovered
};

struct AsDelta {
  Asn asn = 0;
  int64_t delta = 0;
  std::optional<double> growth_multiplier; // to/from; absent when from == 0
  bool new_entry = false;                  // grew from a zero baseline
  bool anti_correlated = false;
};

struct RecoveryAttribution {
  std::string from_date;
  std::string to_date;
  std::vector<CategoryDelta> categories;
  std::vector<AsDelta> ases; // growth-multiplier machinery, largest first
  int64_t total_delta = 0;
  bool empty = false; // no category moved
};

/// Category deltas between two dates with each positive delta's share
/// of the positive sum; negative categories are flagged anti-correlated.
/// Identical dates are an error; an all-zero delta yields an explicit
/// empty result.
RecoveryAttribution recovery_attribution(const PerAsCounts& counts,
                                         const std::string& floor_date,
                                         const std::string& recovery_date,
                                         const std::map<Asn, AsRecord>& records);

/// Input readers. Counts CSV: "date,asn,hosts". Metadata CSV:
/// "asn,name,category" (category may be blank). Rules JSON: ordered
/// [{"pattern":..., "category":...}]. Overrides JSON: {"asn": category}.
PerAsCounts read_counts_csv(std::istream& in);
PerAsCounts read_counts_csv_file(const std::string& path);
struct MetadataEntry {
  std::string name;
  std::optional<std::string> category;
};
std::map<Asn, MetadataEntry> read_metadata_csv_file(const std::string& path);
std::vector<KeywordRule> read_rules_json_file(const std::string& path);
std::map<Asn, Category> read_overrides_json_file(const std::string& path);

/// Builds the AsRecord table for every ASN present in `counts`.
std::map<Asn, AsRecord> build_records(const PerAsCounts& counts,
                                      const std::map<Asn, MetadataEntry>& metadata,
                                      const std::vector<KeywordRule>& keyword_rules,
                                      const std::map<Asn, Category>& overrides);

/// CSV export: date,category,hosts,share_pct, one row per cell.
void export_composition_csv(const std::vector<CompositionCell>& cells, std::ostream& out);

void export_findings_json(const std::vector<ExemptionFinding>& exemption_findings,
                          const RecoveryAttribution& attribution, double exemption_threshold,
                          std::ostream& out);

} // namespace outagekit::ascomp
