// Synthetic worlds and deterministic end-to-end replays.
//
//   harness generate --spec world.toml --out events.jsonl
//   harness replay --events events.jsonl --report report.json [--exports DIR]

#include <glog/logging.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "paperfeed/common/errors.hpp"
#include "paperfeed/harness/replay.hpp"
#include "paperfeed/harness/world.hpp"

using namespace paperfeed;

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;

  CLI::App app{"Synthetic world generator and replay driver"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "write a world's event log and ground truth");
  std::string spec_path;
  std::string out_path;
  generate->add_option("--spec", spec_path, "world spec (key = value)")->required()->check(CLI::ExistingFile);
  generate->add_option("--out", out_path, "event log to write")->required();

  auto* replay = app.add_subcommand("replay", "replay an event log through every service and check invariants");
  std::string events_path;
  std::string report_path;
  std::string exports_dir;
  harness::ReplayOptions options;
  replay->add_option("--events", events_path, "event log from 'generate'")->required()->check(CLI::ExistingFile);
  replay->add_option("--report", report_path, "JSON report to write")->required();
  replay->add_option("--exports", exports_dir, "write table exports here");
  replay->add_option("--ingest-workers", options.ingest_workers)->capture_default_str();
  replay->add_option("--engine-workers", options.engine_workers)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      const auto spec = harness::WorldSpec::load(spec_path);
      const auto world = harness::generate_world(spec);
      harness::write_world(world, out_path);
      LOG(INFO) << "wrote " << world.events.size() << " events to " << out_path << " and "
                << harness::world_sidecar(out_path).string();
      return 0;
    }
    const auto world = harness::read_world(events_path);
    if (!exports_dir.empty()) options.export_dir = exports_dir;
    const auto outcome = harness::replay(world, options);
    std::ofstream out(report_path, std::ios::trunc);
    if (!out) throw Error("cannot write " + report_path);
    out << outcome.report.to_json().dump(2) << '\n';
    for (const auto& check : outcome.report.checks) {
      if (check.passed) continue;
      std::cerr << "FAILED " << check.name << '\n';
      for (const auto& v : check.violations) std::cerr << "  " << v << '\n';
    }
    LOG(INFO) << "replay " << (outcome.report.passed() ? "passed" : "failed") << ", report in " << report_path;
    return outcome.report.passed() ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "harness: " << e.what() << '\n';
    return 1;
  }
}
