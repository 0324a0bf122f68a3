// outagekit-fixgen: materializes deterministic measurement fixtures
// (synthetic MRT bviews, delegated files, replay scripts) from compact
// scenario and plan specs, so binary fixtures never live in the tree.

#include "outagekit/error.hpp"
#include "outagekit/fixtures.hpp"
#include "outagekit/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace outagekit;

namespace {

void generate_scripts(const std::string& plan_path, const std::string& out_dir) {
  auto spec = fixtures::load_plan_spec(plan_path);
  auto targets_path = fs::path(plan_path).parent_path() / spec.targets_file;
  auto targets = fixtures::read_probe_targets(targets_path.string());
  auto plan = fixtures::expand_plan(spec, targets);
  auto per_run = harness::script_from_plan(plan, spec.runs);
  auto merged = harness::merged_script(per_run);

  fs::create_directories(out_dir);
  auto script_path = fs::path(out_dir) / ("script-" + spec.vantage + ".jsonl");
  std::ofstream out(script_path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + script_path.string());
  merged.write_jsonl(out);
  auto targets_copy = fs::path(out_dir) / ("targets-" + spec.vantage + ".txt");
  fixtures::write_probe_targets(targets, targets_copy.string());
  std::cout << spec.vantage << ": " << merged.size() << " script entries, " << targets.size()
            << " targets, " << spec.runs << " runs\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"outagekit-fixgen: deterministic fixture materializer"};

  std::string scenario_path;
  std::vector<std::string> plan_paths;
  std::string out_dir = "fixtures-out";
  app.add_option("--scenario", scenario_path, "BGP scenario JSON");
  app.add_option("--plan", plan_paths, "probe plan JSON (repeatable)");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(out_dir);
    if (!scenario_path.empty()) {
      auto events = fixtures::load_bgp_scenario(scenario_path);
      for (const auto& event : events) {
        auto files =
            fixtures::write_bgp_event_fixtures(event, (fs::path(out_dir) / "bgp").string());
        std::cout << event.name << ": delegated + " << files.bview_paths.size()
                  << " bview file(s)\n";
      }
    }
    for (const auto& plan_path : plan_paths)
      generate_scripts(plan_path, (fs::path(out_dir) / "probe").string());
    if (scenario_path.empty() && plan_paths.empty()) {
      std::cerr << "nothing to do: give --scenario and/or --plan\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
