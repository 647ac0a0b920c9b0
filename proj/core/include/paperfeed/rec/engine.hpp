#pragma once

#include <atomic>
#include <cstdint>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "paperfeed/common/clock.hpp"
#include "paperfeed/common/scheduling.hpp"
#include "paperfeed/common/thread_pool.hpp"
#include "paperfeed/rec/follows.hpp"
#include "paperfeed/rec/ranking.hpp"
#include "paperfeed/store/store.hpp"

namespace paperfeed::rec {

struct EngineConfig {
  std::chrono::minutes period{20};
  std::size_t batch_size = 20;
  std::size_t per_author_cap = 10;
  std::size_t list_cap = 150;
  std::size_t counterfactual_cap = 30;
  std::vector<Algorithm> algorithms{Algorithm::reverse_chronological()};
  /// The algorithm whose list the feed serves and the default feed uses.
  std::string served_algorithm{kReverseChronological};
  std::size_t worker_threads = 4;
  std::uint64_t seed = 20;
};

struct Batch {
  std::uint64_t batch_id = 0;
  std::vector<std::string> user_ids;
  bool is_default_feed_batch = false;
};

/// Shuffles users with the seeded generator, chunks them into batches of
/// `batch_size` (the last may be smaller) and flags one uniformly chosen
/// batch for default-feed regeneration. The reserved default-feed key is
/// never dispatched.
std::vector<Batch> dispatch(std::span<const std::string> users, std::uint64_t seed, std::size_t batch_size = 20);

/// Something that can be asked to refresh a user's recommendations in the
/// background. The feed endpoint holds one of these, never the engine's
/// follows client.
class RegenerationSink {
 public:
  virtual ~RegenerationSink() = default;
  virtual void request_regeneration(const std::string& user_id) = 0;
};

struct GenerationResult {
  std::string user_id;
  bool ok = false;
  std::string error;
  Timestamp generated_at{};
  Duration elapsed{};
  std::vector<store::RecommendationList> lists;
};

struct CycleReport {
  std::uint64_t cycle = 0;
  Timestamp started_at{};
  std::size_t batches = 0;
  std::size_t users = 0;
  std::size_t failures = 0;
  bool default_feed_updated = false;
};

struct EngineStats {
  std::uint64_t generations = 0;
  std::uint64_t failures = 0;
  std::uint64_t counterfactuals_written = 0;
  std::uint64_t cycles = 0;
};

/// Offline recommendation pipeline: periodic dispatch, per-user generation
/// for every configured algorithm, counterfactual logging and default-feed
/// maintenance.
class RecEngine : public RegenerationSink {
 public:
  RecEngine(EngineConfig config, store::Store& store, FollowsClient& follows, const Clock& clock);
  ~RecEngine() override;

  RecEngine(const RecEngine&) = delete;
  RecEngine& operator=(const RecEngine&) = delete;

  /// Fetches follows, ranks under each algorithm, stores every list
  /// (last-writer-wins per user and algorithm) and the top
  /// `counterfactual_cap` of each ranking as a counterfactual record
  /// (skipped for opted-out users). When the follows fetch fails, stored
  /// lists are left untouched and the failure is counted.
  GenerationResult generate_for_user(const std::string& user_id);

  /// Rebuilds the default feed from the served-algorithm lists of a batch.
  /// Returns the new feed, or nullopt (keeping the previous one) when the
  /// lists are empty.
  std::optional<std::vector<std::string>> build_default_feed(std::span<const store::RecommendationList> batch_lists);

  /// Dispatches one cycle over all stored users and returns once its batches
  /// have been submitted. Batches run concurrently on the engine pool.
  std::shared_future<CycleReport> start_cycle();

  /// start_cycle() and wait for it.
  CycleReport run_cycle();

  /// Runs start_cycle() every `config.period` on a background thread.
  void start_scheduler();
  void stop_scheduler();

  /// Regenerates one user's lists in the background. Requests for a user
  /// already queued are coalesced. Counterfactuals are only logged by
  /// scheduled cycles.
  void request_regeneration(const std::string& user_id) override;

  /// Waits for every queued batch and regeneration.
  void wait_idle();

  EngineStats stats() const;
  const EngineConfig& config() const { return config_; }

 private:
  GenerationResult generate(const std::string& user_id, bool log_counterfactuals);

  EngineConfig config_;
  store::Store& store_;
  FollowsClient& follows_;
  const Clock& clock_;
  ThreadPool pool_;
  std::unique_ptr<PeriodicTask> scheduler_;

  std::mutex regen_mu_;
  std::set<std::string> regen_inflight_;

  std::atomic<std::uint64_t> cycle_counter_{0};
  std::atomic<std::uint64_t> generations_{0};
  std::atomic<std::uint64_t> failures_{0};
  std::atomic<std::uint64_t> counterfactuals_{0};
  std::atomic<std::uint64_t> cycles_{0};
};

}  // namespace paperfeed::rec
