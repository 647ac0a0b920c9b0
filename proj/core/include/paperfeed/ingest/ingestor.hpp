#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stop_token>
#include <thread>
#include <vector>

#include "paperfeed/classify/classifier.hpp"
#include "paperfeed/common/bounded_queue.hpp"
#include "paperfeed/common/jsonl.hpp"
#include "paperfeed/ingest/event.hpp"
#include "paperfeed/ingest/event_source.hpp"
#include "paperfeed/store/store.hpp"

namespace paperfeed::ingest {

struct IngestConfig {
  std::size_t queue_capacity = 1024;
  std::size_t worker_count = 4;
  std::optional<std::filesystem::path> resume_checkpoint_path;
  std::optional<std::filesystem::path> dead_letter_path;
  /// Attempts per event before it is dead-lettered.
  int max_write_attempts = 3;
  std::uint64_t checkpoint_every = 100;
  Duration initial_backoff = std::chrono::milliseconds(100);
  Duration max_backoff = std::chrono::seconds(30);
  /// Consecutive failed reconnects before run() gives up; < 0 means never.
  int max_reconnect_attempts = -1;
};

struct IngestStats {
  std::uint64_t received = 0;
  std::uint64_t enqueued = 0;
  std::uint64_t dropped_irrelevant = 0;
  std::uint64_t skipped_already_seen = 0;
  std::uint64_t processed = 0;
  std::uint64_t posts_stored = 0;
  std::uint64_t posts_rejected = 0;
  std::uint64_t posts_duplicate = 0;
  std::uint64_t interactions_stored = 0;
  std::uint64_t interactions_duplicate = 0;
  std::uint64_t interactions_unknown_subject = 0;
  std::uint64_t deletes_applied = 0;
  std::uint64_t deletes_unknown = 0;
  std::uint64_t write_retries = 0;
  std::uint64_t dead_lettered = 0;
  std::uint64_t reconnects = 0;
};

/// Firehose consumer: one producer feeds N workers through bounded queues.
///
/// Events are partitioned by the post they concern (record.uri for creates,
/// subject_uri otherwise), so everything about one post is applied in seq
/// order by a single worker. Writes are idempotent, which makes redelivery
/// after a crash or reconnect harmless.
class Ingestor {
 public:
  using Sleeper = std::function<void(Duration)>;

  Ingestor(IngestConfig config, const classify::PaperClassifier& classifier, store::Store& store,
           Sleeper sleeper = {});
  ~Ingestor();

  Ingestor(const Ingestor&) = delete;
  Ingestor& operator=(const Ingestor&) = delete;

  /// Routes one event. Irrelevant kinds are dropped and counted (returns
  /// false); relevant ones are enqueued, blocking while the target queue is
  /// full.
  bool submit(EventEnvelope event);

  /// Waits until every submitted event has been processed.
  void drain();

  /// Reads `source` until it closes or `stop` is requested, reconnecting
  /// with exponential backoff and skipping events at or below the last seen
  /// seq. Resumes from the checkpoint file when one is configured. Drains
  /// before returning.
  void run(EventSource& source, std::stop_token stop = {});

  /// Applies one event to the store synchronously (the worker body).
  /// Retries store failures and dead-letters the event after the last
  /// attempt.
  void process(const EventEnvelope& event);

  /// Highest seq such that every submitted event with seq <= it is done.
  std::uint64_t low_watermark() const;
  std::uint64_t last_seen_seq() const { return last_seen_seq_.load(); }

  IngestStats stats() const;

  /// Reads a checkpoint file; 0 when missing.
  static std::uint64_t read_checkpoint(const std::filesystem::path& path);

 private:
  struct Counters;

  void worker_loop(std::size_t index);
  void apply(const EventEnvelope& event);
  void finish(std::uint64_t seq);
  void write_checkpoint(std::uint64_t seq);
  std::size_t partition_of(const EventEnvelope& event) const;

  IngestConfig config_;
  const classify::PaperClassifier& classifier_;
  store::Store& store_;
  Sleeper sleep_;
  std::unique_ptr<Counters> counters_;
  std::unique_ptr<JsonlAppender> dead_letters_;

  std::vector<std::unique_ptr<BoundedQueue<EventEnvelope>>> queues_;
  std::vector<std::jthread> workers_;

  mutable std::mutex inflight_mu_;
  std::condition_variable drained_cv_;
  std::multiset<std::uint64_t> inflight_;
  std::uint64_t highest_submitted_ = 0;
  std::atomic<std::uint64_t> last_seen_seq_{0};
  std::uint64_t since_checkpoint_ = 0;
};

}  // namespace paperfeed::ingest
