#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "paperfeed/classify/arxiv.hpp"
#include "paperfeed/common/time.hpp"
#include "paperfeed/ingest/event.hpp"

namespace paperfeed::harness {

/// Parameters of a synthetic world. Read from a plain `key = value` file
/// (one per line, `#` comments, lists as `[a, b, c]`); see config/world.toml.
struct WorldSpec {
  std::uint64_t seed = 7;
  std::size_t n_users = 50;
  /// Follow out-degree: Pareto(alpha = 2) scaled to this mean, capped.
  double follow_degree_mean = 30.0;
  std::size_t follow_degree_max = 200;
  double paper_post_rate = 1.0;      // per account per day
  double non_paper_post_rate = 3.0;  // per account per day
  double quote_fraction = 0.1;       // of paper posts
  double delete_fraction = 0.03;     // of paper posts
  double repost_rate = 0.3;          // per account per day
  double background_like_rate = 2.0; // per account per day, outside the feed
  double bot_fraction = 0.1;
  double bot_posts_per_day = 150.0;
  int warmup_days = 0;    // posting only, before the feed launches
  int duration_days = 7;  // feed active
  Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2025} / 3 / 1}};

  // Reader behavior during replay.
  double sessions_per_day = 2.0;
  double next_page_probability = 0.3;
  int page_size = 30;
  double like_delay_max_seconds = 20.0;
  /// Like probability at 1-based feed position r: explicit values for the
  /// first ranks, then base / (1 + decay * (r - 1)).
  std::vector<double> position_bias;
  double position_bias_base = 0.2;
  double position_bias_decay = 0.75;
  std::size_t opt_out_users = 1;

  // Follows-service stub.
  double follows_latency_ms = 0.0;
  double follows_failure_rate = 0.0;

  double like_probability(int rank) const;

  /// Throws ValidationError for negative rates, an increasing bias curve or
  /// an infeasible follow degree.
  void validate() const;

  Timestamp feed_start() const { return start + std::chrono::days(warmup_days); }
  Timestamp end() const { return feed_start() + std::chrono::days(duration_days); }

  static WorldSpec parse(std::string_view text);
  static WorldSpec load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct Account {
  std::string did;
  std::string handle;
  bool bot = false;
};

/// Everything generate_world plants, kept for replay and recovery checks.
struct World {
  WorldSpec spec;
  std::vector<Account> accounts;
  std::map<std::string, std::vector<std::string>> follows;
  std::vector<std::string> feed_users;
  std::vector<ingest::EventEnvelope> events;
  classify::ArxivCatalog catalog;
  /// Planted labels: uri -> paper post?
  std::map<std::string, bool> is_paper;
  std::vector<std::string> deleted;

  nlohmann::json ground_truth() const;
};

World generate_world(const WorldSpec& spec);

/// Writes the event log and, next to it, `<stem>.world.json` (spec, accounts,
/// follows, catalog, planted labels).
void write_world(const World& world, const std::filesystem::path& events_path);
World read_world(const std::filesystem::path& events_path);
std::filesystem::path world_sidecar(const std::filesystem::path& events_path);

}  // namespace paperfeed::harness
