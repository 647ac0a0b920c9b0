#include "paperfeed/ingest/ingestor.hpp"

#include <fstream>
#include <thread>

#include <glog/logging.h>

#include "paperfeed/common/errors.hpp"

namespace paperfeed::ingest {

struct Ingestor::Counters {
  std::atomic<std::uint64_t> received{0};
  std::atomic<std::uint64_t> enqueued{0};
  std::atomic<std::uint64_t> dropped_irrelevant{0};
  std::atomic<std::uint64_t> skipped_already_seen{0};
  std::atomic<std::uint64_t> processed{0};
  std::atomic<std::uint64_t> posts_stored{0};
  std::atomic<std::uint64_t> posts_rejected{0};
  std::atomic<std::uint64_t> posts_duplicate{0};
  std::atomic<std::uint64_t> interactions_stored{0};
  std::atomic<std::uint64_t> interactions_duplicate{0};
  std::atomic<std::uint64_t> interactions_unknown_subject{0};
  std::atomic<std::uint64_t> deletes_applied{0};
  std::atomic<std::uint64_t> deletes_unknown{0};
  std::atomic<std::uint64_t> write_retries{0};
  std::atomic<std::uint64_t> dead_lettered{0};
  std::atomic<std::uint64_t> reconnects{0};
};

namespace {

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

Ingestor::Ingestor(IngestConfig config, const classify::PaperClassifier& classifier, store::Store& store,
                   Sleeper sleeper)
    : config_(std::move(config)),
      classifier_(classifier),
      store_(store),
      sleep_(sleeper ? std::move(sleeper) : Sleeper([](Duration d) { std::this_thread::sleep_for(d); })),
      counters_(std::make_unique<Counters>()) {
  if (config_.worker_count == 0) throw ValidationError("worker_count must be positive");
  if (config_.queue_capacity == 0) throw ValidationError("queue_capacity must be positive");
  if (config_.dead_letter_path) dead_letters_ = std::make_unique<JsonlAppender>(*config_.dead_letter_path);
  for (std::size_t i = 0; i < config_.worker_count; ++i) {
    queues_.push_back(std::make_unique<BoundedQueue<EventEnvelope>>(config_.queue_capacity));
  }
  for (std::size_t i = 0; i < config_.worker_count; ++i) {
    workers_.emplace_back([this, i] { worker_loop(i); });
  }
}

Ingestor::~Ingestor() {
  for (auto& queue : queues_) queue->close();
  workers_.clear();
}

std::size_t Ingestor::partition_of(const EventEnvelope& event) const {
  std::string_view key;
  if (event.kind == EventKind::post_create && event.record) {
    key = event.record->uri;
  } else if (event.subject_uri) {
    key = *event.subject_uri;
  }
  return fnv1a(key) % queues_.size();
}

bool Ingestor::submit(EventEnvelope event) {
  counters_->received.fetch_add(1, std::memory_order_relaxed);
  {
    std::lock_guard lock(inflight_mu_);
    highest_submitted_ = std::max(highest_submitted_, event.seq);
    if (is_relevant(event.kind)) inflight_.insert(event.seq);
  }
  std::uint64_t seen = last_seen_seq_.load();
  while (event.seq > seen && !last_seen_seq_.compare_exchange_weak(seen, event.seq)) {
  }
  if (!is_relevant(event.kind)) {
    counters_->dropped_irrelevant.fetch_add(1, std::memory_order_relaxed);
    return false;
  }
  const auto seq = event.seq;
  auto& queue = *queues_[partition_of(event)];
  if (!queue.push(std::move(event))) {
    finish(seq);
    throw Error("ingestor is shutting down");
  }
  counters_->enqueued.fetch_add(1, std::memory_order_relaxed);
  return true;
}

void Ingestor::worker_loop(std::size_t index) {
  auto& queue = *queues_[index];
  while (auto event = queue.pop()) {
    process(*event);
    finish(event->seq);
  }
}

void Ingestor::finish(std::uint64_t seq) {
  std::lock_guard lock(inflight_mu_);
  if (auto it = inflight_.find(seq); it != inflight_.end()) inflight_.erase(it);
  if (inflight_.empty()) drained_cv_.notify_all();
}

void Ingestor::drain() {
  std::unique_lock lock(inflight_mu_);
  drained_cv_.wait(lock, [&] { return inflight_.empty(); });
}

std::uint64_t Ingestor::low_watermark() const {
  std::lock_guard lock(inflight_mu_);
  return inflight_.empty() ? highest_submitted_ : *inflight_.begin() - 1;
}

void Ingestor::process(const EventEnvelope& event) {
  std::string last_error;
  const int attempts = std::max(1, config_.max_write_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      apply(event);
      counters_->processed.fetch_add(1, std::memory_order_relaxed);
      return;
    } catch (const StoreUnavailable& e) {
      last_error = e.what();
      if (attempt < attempts) {
        counters_->write_retries.fetch_add(1, std::memory_order_relaxed);
        sleep_(std::chrono::milliseconds(10) * attempt);
      }
    }
  }
  counters_->dead_lettered.fetch_add(1, std::memory_order_relaxed);
  LOG(WARNING) << "dead-lettering event seq=" << event.seq << ": " << last_error;
  if (dead_letters_) {
    auto row = event_to_json(event);
    row["error"] = last_error;
    dead_letters_->append(row);
  }
}

void Ingestor::apply(const EventEnvelope& event) {
  switch (event.kind) {
    case EventKind::post_create: {
      const auto& record = *event.record;
      auto result = classifier_.classify(record.text, record.links);
      if (!result.is_paper) {
        counters_->posts_rejected.fetch_add(1, std::memory_order_relaxed);
        return;
      }
      store::StoredPost post;
      post.uri = record.uri;
      post.author_id = record.author_id;
      post.text = record.text;
      post.links = record.links;
      post.arxiv_ids = std::move(result.arxiv_ids);
      post.created_at = record.created_at;
      post.ingested_at = event.received_at;
      post.reply_parent = record.reply_parent;
      post.quote_of = record.quote_of;
      if (store_.put_post(post)) {
        counters_->posts_stored.fetch_add(1, std::memory_order_relaxed);
      } else {
        counters_->posts_duplicate.fetch_add(1, std::memory_order_relaxed);
      }
      return;
    }
    case EventKind::post_delete:
      if (store_.mark_deleted(*event.subject_uri)) {
        counters_->deletes_applied.fetch_add(1, std::memory_order_relaxed);
      } else {
        counters_->deletes_unknown.fetch_add(1, std::memory_order_relaxed);
      }
      return;
    case EventKind::like:
    case EventKind::repost: {
      if (!store_.contains_post(*event.subject_uri)) {
        counters_->interactions_unknown_subject.fetch_add(1, std::memory_order_relaxed);
        return;
      }
      store::InteractionRecord record{
          event.actor_id, *event.subject_uri,
          event.kind == EventKind::like ? store::InteractionKind::like : store::InteractionKind::repost,
          event.created_at};
      if (store_.put_interaction(record)) {
        counters_->interactions_stored.fetch_add(1, std::memory_order_relaxed);
      } else {
        counters_->interactions_duplicate.fetch_add(1, std::memory_order_relaxed);
      }
      return;
    }
    case EventKind::follow: return;
  }
}

std::uint64_t Ingestor::read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::uint64_t seq = 0;
  if (in >> seq) return seq;
  return 0;
}

void Ingestor::write_checkpoint(std::uint64_t seq) {
  if (!config_.resume_checkpoint_path) return;
  const auto& path = *config_.resume_checkpoint_path;
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << seq << '\n';
    if (!out) {
      LOG(WARNING) << "cannot write checkpoint " << tmp;
      return;
    }
  }
  std::filesystem::rename(tmp, path);
}

void Ingestor::run(EventSource& source, std::stop_token stop) {
  if (config_.resume_checkpoint_path) {
    const auto resume = read_checkpoint(*config_.resume_checkpoint_path);
    std::uint64_t seen = last_seen_seq_.load();
    while (resume > seen && !last_seen_seq_.compare_exchange_weak(seen, resume)) {
    }
  }

  Duration backoff = config_.initial_backoff;
  int failed_reconnects = 0;
  while (!stop.stop_requested()) {
    std::optional<EventEnvelope> event;
    try {
      event = source.next();
    } catch (const StreamDisconnected& e) {
      LOG(WARNING) << "event stream disconnected after seq " << last_seen_seq_.load() << ": " << e.what();
      bool reconnected = false;
      while (!reconnected && !stop.stop_requested()) {
        counters_->reconnects.fetch_add(1, std::memory_order_relaxed);
        sleep_(backoff);
        backoff = std::min(backoff * 2, config_.max_backoff);
        try {
          source.reconnect(last_seen_seq_.load());
          reconnected = true;
        } catch (const StreamDisconnected& retry_error) {
          ++failed_reconnects;
          if (config_.max_reconnect_attempts >= 0 && failed_reconnects > config_.max_reconnect_attempts) {
            drain();
            write_checkpoint(low_watermark());
            throw;
          }
        }
      }
      failed_reconnects = 0;
      continue;
    }
    if (!event) break;
    backoff = config_.initial_backoff;
    if (event->seq <= last_seen_seq_.load()) {
      counters_->skipped_already_seen.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    submit(std::move(*event));
    if (++since_checkpoint_ >= config_.checkpoint_every) {
      since_checkpoint_ = 0;
      write_checkpoint(low_watermark());
    }
  }
  drain();
  write_checkpoint(low_watermark());
}

IngestStats Ingestor::stats() const {
  const auto& c = *counters_;
  IngestStats s;
  s.received = c.received.load();
  s.enqueued = c.enqueued.load();
  s.dropped_irrelevant = c.dropped_irrelevant.load();
  s.skipped_already_seen = c.skipped_already_seen.load();
  s.processed = c.processed.load();
  s.posts_stored = c.posts_stored.load();
  s.posts_rejected = c.posts_rejected.load();
  s.posts_duplicate = c.posts_duplicate.load();
  s.interactions_stored = c.interactions_stored.load();
  s.interactions_duplicate = c.interactions_duplicate.load();
  s.interactions_unknown_subject = c.interactions_unknown_subject.load();
  s.deletes_applied = c.deletes_applied.load();
  s.deletes_unknown = c.deletes_unknown.load();
  s.write_retries = c.write_retries.load();
  s.dead_lettered = c.dead_lettered.load();
  s.reconnects = c.reconnects.load();
  return s;
}

}  // namespace paperfeed::ingest
