#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "paperfeed/analytics/adoption.hpp"
#include "paperfeed/harness/world.hpp"
#include "paperfeed/rec/assembly.hpp"
#include "paperfeed/store/store.hpp"

namespace paperfeed::harness {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::uint64_t checked = 0;
  /// First violations, as human-readable traces.
  std::vector<std::string> violations;
};

struct ReplayReport {
  std::vector<CheckResult> checks;
  nlohmann::json stats = nlohmann::json::object();

  bool passed() const;
  nlohmann::json to_json() const;
};

struct ReplayOptions {
  /// Where to write one JSON-lines export per table plus all_likes.jsonl.
  std::optional<std::filesystem::path> export_dir;
  std::size_t ingest_workers = 4;
  std::size_t engine_workers = 4;
  rec::SystemPosts system_posts = default_system_posts();

  static rec::SystemPosts default_system_posts();
};

/// Result of a replay: the report plus the final store for inspection.
struct ReplayOutcome {
  ReplayReport report;
  std::unique_ptr<store::Store> store;
  /// Every like, in and outside the feed, labeled paper or not.
  std::vector<analytics::LikeEvent> all_likes;
};

/// Runs the world on a virtual clock: ingests its events, fires 20-minute
/// recommendation cycles and 4-minute keep-warm pings, simulates sessions
/// and position-biased likes through the feed service, and checks
/// invariants along the way.
ReplayOutcome replay(const World& world, const ReplayOptions& options = {});

}  // namespace paperfeed::harness
