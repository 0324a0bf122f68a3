#include "outagekit/ascomp.hpp"
#include "outagekit/coverage.hpp"
#include "outagekit/harness.hpp"
#include "outagekit/mrt.hpp"
#include "outagekit/passive.hpp"
#include "outagekit/probe.hpp"
#include "outagekit/registry.hpp"
#include "outagekit/verdicts.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace outagekit;

namespace {

Ipv4Prefix prefix_arg(const std::string& text) {
  auto prefix = parse_prefix(text);
  if (!prefix)
    throw py::value_error("bad IPv4 prefix: " + text);
  return *prefix;
}

std::vector<std::string> prefix_strings(const std::set<Ipv4Prefix>& prefixes) {
  std::vector<std::string> out;
  out.reserve(prefixes.size());
  for (const auto& prefix : prefixes)
    out.push_back(prefix.to_string());
  return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "outagekit core: BGP coverage, reachability verdicts and scan analytics";

  py::enum_<probe::OutcomeKind>(m, "OutcomeKind")
      .value("SYN_ACK", probe::OutcomeKind::SYN_ACK)
      .value("RST", probe::OutcomeKind::RST)
      .value("ICMP_UNREACHABLE", probe::OutcomeKind::ICMP_UNREACHABLE)
      .value("TIMEOUT", probe::OutcomeKind::TIMEOUT);

  py::enum_<verdicts::Verdict>(m, "Verdict")
      .value("NULL_ROUTE", verdicts::Verdict::NULL_ROUTE)
      .value("REACHABLE", verdicts::Verdict::REACHABLE)
      .value("BGP_WITHDRAW", verdicts::Verdict::BGP_WITHDRAW)
      .value("FIREWALL_ACL", verdicts::Verdict::FIREWALL_ACL)
      .value("AMBIGUOUS", verdicts::Verdict::AMBIGUOUS);

  m.def("classify", &verdicts::classify, py::arg("port80"), py::arg("port443"),
        py::arg("port179"),
        "Classify one run's port 80/443/179 outcomes into a verdict.");

  m.def(
      "consensus",
      [](const std::map<verdicts::Verdict, uint32_t>& run_verdicts) {
        auto [verdict, support] = verdicts::consensus(run_verdicts);
        return py::make_tuple(verdict, support);
      },
      py::arg("run_verdicts"),
      "Majority vote over run verdict counts; returns (verdict, support).");

  m.def(
      "derive_target",
      [](const std::string& prefix) {
        return format_ipv4(probe::derive_target(prefix_arg(prefix)).target_address);
      },
      py::arg("prefix"), "Probe address for a prefix (base+6, base+1, or the /32 itself).");

  m.def(
      "decompose_interval",
      [](const std::string& start, uint64_t count) {
        auto addr = parse_ipv4(start);
        if (!addr)
          throw py::value_error("bad IPv4 address: " + start);
        std::vector<std::string> out;
        for (const auto& cidr : registry::decompose_interval(*addr, count))
          out.push_back(cidr.to_string());
        return out;
      },
      py::arg("start"), py::arg("count"),
      "Greedy aligned-CIDR decomposition of [start, start+count).");

  m.def(
      "compute_coverage",
      [](const std::vector<std::string>& allocated, const std::vector<std::string>& announced) {
        std::vector<registry::AllocatedPrefix> allocated_prefixes;
        for (const auto& text : allocated)
          allocated_prefixes.push_back({prefix_arg(text), {}});
        std::sort(allocated_prefixes.begin(), allocated_prefixes.end());
        std::set<Ipv4Prefix> announced_set;
        for (const auto& text : announced)
          announced_set.insert(prefix_arg(text));
        auto result = coverage::compute_coverage(allocated_prefixes, announced_set, "");
        py::dict out;
        out["allocated"] = result.allocated_count;
        out["announced"] = result.announced_count;
        out["covered"] = result.covered_count;
        out["coverage_fraction"] = result.coverage_fraction;
        std::vector<std::string> covered;
        for (const auto& prefix : result.covered_set)
          covered.push_back(prefix.cidr.to_string());
        out["covered_set"] = covered;
        return out;
      },
      py::arg("allocated"), py::arg("announced"),
      "Coverage of allocated CIDRs by announced CIDRs (equal, more-specific or aggregate).");

  m.def(
      "parse_bview",
      [](const std::string& path, const std::string& capture_date) {
        auto snapshot = mrt::parse_bview_file(path, capture_date);
        py::list entries;
        for (const auto& entry : snapshot.entries) {
          py::dict row;
          row["prefix"] = entry.prefix.to_string();
          row["origin"] = entry.origin;
          row["path"] = entry.path;
          row["peer_index"] = entry.peer_index;
          entries.append(row);
        }
        py::dict out;
        out["capture_date"] = snapshot.capture_date;
        out["peer_count"] = snapshot.peer_count;
        out["skipped_records"] = snapshot.skipped_records;
        out["entries"] = entries;
        return out;
      },
      py::arg("path"), py::arg("capture_date"),
      "Parse an MRT bview file (raw, gzip or bzip2).");

  m.def(
      "originated_prefixes",
      [](const std::string& path, const std::string& capture_date,
         const std::set<uint32_t>& asns) {
        auto snapshot = mrt::parse_bview_file(path, capture_date);
        return prefix_strings(mrt::originated_prefixes(snapshot, asns));
      },
      py::arg("path"), py::arg("capture_date"), py::arg("asns"),
      "Distinct prefixes in a bview file originated by any of the given ASNs.");

  m.def(
      "country_asns",
      [](const std::string& path, const std::string& snapshot_date, const std::string& country,
         const std::set<std::string>& statuses) {
        auto delegated = registry::parse_delegated_file(path, snapshot_date);
        return registry::country_asns(delegated.records, country, statuses);
      },
      py::arg("path"), py::arg("snapshot_date"), py::arg("country"),
      py::arg("statuses") = registry::default_statuses(),
      "Country ASN set from a delegated statistics file.");

  m.def(
      "country_prefixes",
      [](const std::string& path, const std::string& snapshot_date, const std::string& country,
         const std::set<std::string>& statuses) {
        auto delegated = registry::parse_delegated_file(path, snapshot_date);
        std::vector<std::string> out;
        for (const auto& prefix :
             registry::country_prefixes(delegated.records, country, statuses))
          out.push_back(prefix.cidr.to_string());
        return out;
      },
      py::arg("path"), py::arg("snapshot_date"), py::arg("country"),
      py::arg("statuses") = registry::default_statuses(),
      "Decomposed allocated CIDRs for a country from a delegated statistics file.");

  m.def(
      "reduction",
      [](uint64_t active, uint64_t reference) {
        passive::BaselineBand band;
        band.low = band.high = band.reference = reference;
        return passive::reduction(active, band);
      },
      py::arg("active"), py::arg("reference"),
      "Signed percentage-point reduction of `active` versus the baseline reference.");

  m.attr("__version__") = "0.1.0";
}
