#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "paperfeed/common/clock.hpp"
#include "paperfeed/common/scheduling.hpp"
#include "paperfeed/common/thread_pool.hpp"
#include "paperfeed/feed/auth.hpp"
#include "paperfeed/feed/pagination.hpp"
#include "paperfeed/rec/assembly.hpp"
#include "paperfeed/rec/engine.hpp"
#include "paperfeed/store/store.hpp"

namespace paperfeed::feed {

struct FeedConfig {
  /// Public hostname; the service identity is did:web:<hostname>.
  std::string hostname = "localhost";
  std::vector<std::string> feed_uris;
  std::string bind_address = "0.0.0.0";
  int port = 3000;
  int default_limit = 30;
  std::string served_algorithm{rec::kReverseChronological};
  rec::SystemPosts system_posts;
  std::chrono::minutes keep_warm_period{4};

  std::string service_did() const { return "did:web:" + hostname; }

  /// Reads the JSON config used by the feed daemon. Throws ParseError.
  static FeedConfig from_json(const nlohmann::json& j);
};

struct FeedStats {
  std::uint64_t requests = 0;
  std::uint64_t logged_out_requests = 0;
  std::uint64_t first_time_requests = 0;
  std::uint64_t sessions = 0;
  std::uint64_t access_logs = 0;
  std::uint64_t keep_warm_pings = 0;
};

/// True while the calling thread is inside get_feed_skeleton. Instrumented
/// dependencies use this to prove the serving path stays cache-only.
bool on_serving_path();

/// The feed generator: serves cached recommendation lists page by page,
/// handles first visits, and pushes all writes (user counters, access
/// logs, regeneration requests) to a background queue so a request only
/// ever reads.
class FeedService {
 public:
  FeedService(FeedConfig config, store::Store& store, rec::RegenerationSink* regeneration, const Clock& clock);
  ~FeedService();

  FeedService(const FeedService&) = delete;
  FeedService& operator=(const FeedService&) = delete;

  /// Throws ValidationError when limit is outside [1, 100] and
  /// StoreUnavailable when the cache cannot be read.
  FeedPage get_feed_skeleton(const AuthContext& auth, int limit, const std::optional<std::string>& cursor);

  bool serves_feed(std::string_view feed_uri) const;
  nlohmann::json describe_feed_generator() const;
  nlohmann::json did_document() const;

  /// Liveness ping; touches the cache and bumps a counter.
  void keep_warm();
  void start_keep_warm();
  void stop_keep_warm();

  /// Blocks until queued postprocessing has been applied.
  void drain();

  FeedStats stats() const;
  const FeedConfig& config() const { return config_; }

 private:
  struct Postprocess {
    std::string user_id;
    Timestamp requested_at;
    int limit = 0;
    std::optional<std::string> cursor;
    std::vector<std::string> served;
    bool first_time = false;
    bool session = false;
    bool consent_shown = false;
  };

  std::vector<std::string> default_feed() const;
  rec::AssemblyFlags session_flags(const std::string& user_id, const store::UserRecord& user, bool new_session);
  void enqueue(Postprocess job);
  void apply(const Postprocess& job);

  FeedConfig config_;
  store::Store& store_;
  rec::RegenerationSink* regeneration_;
  const Clock& clock_;

  std::mutex flags_mu_;
  std::unordered_map<std::string, rec::AssemblyFlags> session_flags_;

  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> logged_out_{0};
  std::atomic<std::uint64_t> first_time_{0};
  std::atomic<std::uint64_t> sessions_{0};
  std::atomic<std::uint64_t> access_logs_{0};
  std::atomic<std::uint64_t> pings_{0};

  ThreadPool postprocess_;
  std::unique_ptr<PeriodicTask> keep_warm_task_;
};

}  // namespace paperfeed::feed
