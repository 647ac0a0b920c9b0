#include "paperfeed/rec/engine.hpp"

#include <glog/logging.h>

#include <algorithm>
#include <numeric>

#include "paperfeed/common/random.hpp"

namespace paperfeed::rec {

std::vector<Batch> dispatch(std::span<const std::string> users, std::uint64_t seed, std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  std::vector<std::string> order;
  order.reserve(users.size());
  for (const auto& u : users) {
    if (u != store::kDefaultFeedUser) order.push_back(u);
  }
  if (order.empty()) return {};

  Rng rng(seed);
  rng.shuffle(std::span<std::string>(order));
  std::vector<Batch> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    Batch b;
    b.batch_id = batches.size();
    const auto end = std::min(order.size(), i + batch_size);
    b.user_ids.assign(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(end));
    batches.push_back(std::move(b));
  }
  batches[rng.below(batches.size())].is_default_feed_batch = true;
  return batches;
}

RecEngine::RecEngine(EngineConfig config, store::Store& store, FollowsClient& follows, const Clock& clock)
    : config_(std::move(config)),
      store_(store),
      follows_(follows),
      clock_(clock),
      pool_(std::max<std::size_t>(1, config_.worker_threads), "rec") {
  if (config_.algorithms.empty()) throw ValidationError("at least one algorithm is required");
  const bool served_known = std::any_of(config_.algorithms.begin(), config_.algorithms.end(),
                                        [&](const Algorithm& a) { return a.algorithm_id == config_.served_algorithm; });
  if (!served_known) throw ValidationError("served algorithm is not configured: " + config_.served_algorithm);
}

RecEngine::~RecEngine() {
  stop_scheduler();
  pool_.wait_idle();
}

GenerationResult RecEngine::generate_for_user(const std::string& user_id) { return generate(user_id, true); }

GenerationResult RecEngine::generate(const std::string& user_id, bool log_counterfactuals) {
  if (user_id == store::kDefaultFeedUser) throw ValidationError("reserved user id: " + user_id);
  GenerationResult result;
  result.user_id = user_id;
  const Timestamp start = clock_.now();
  std::vector<std::string> follows;
  try {
    follows = follows_.get_follows(user_id);
  } catch (const std::exception& e) {
    failures_.fetch_add(1, std::memory_order_relaxed);
    result.error = e.what();
    result.elapsed = clock_.now() - start;
    LOG(WARNING) << "follows fetch failed for " << user_id << ": " << e.what();
    return result;
  }

  const Timestamp generated_at = clock_.now();
  const RankingLimits limits{config_.per_author_cap, config_.list_cap};
  for (const auto& algorithm : config_.algorithms) {
    store::RecommendationList list;
    list.user_id = user_id;
    list.algorithm_id = algorithm.algorithm_id;
    list.generated_at = generated_at;
    list.items = rank_following(store_, follows, algorithm, limits);
    store_.put_recs(list);
    if (log_counterfactuals) {
      store::CounterfactualRecord cf{user_id, algorithm.algorithm_id, generated_at, {}};
      const auto n = std::min(config_.counterfactual_cap, list.items.size());
      for (std::size_t i = 0; i < n; ++i) cf.post_uris.push_back(list.items[i].uri);
      if (store_.put_counterfactual(cf)) counterfactuals_.fetch_add(1, std::memory_order_relaxed);
    }
    result.lists.push_back(std::move(list));
  }
  generations_.fetch_add(1, std::memory_order_relaxed);
  result.ok = true;
  result.generated_at = generated_at;
  result.elapsed = clock_.now() - start;
  return result;
}

std::optional<std::vector<std::string>> RecEngine::build_default_feed(
    std::span<const store::RecommendationList> batch_lists) {
  auto merged = merge_newest(batch_lists, config_.list_cap);
  if (merged.empty()) return std::nullopt;
  store::RecommendationList feed;
  feed.user_id = std::string(store::kDefaultFeedUser);
  feed.algorithm_id = config_.served_algorithm;
  feed.generated_at = clock_.now();
  feed.items = std::move(merged);
  store_.put_recs(feed);
  return feed.uris();
}

namespace {

struct CycleState {
  std::mutex mu;
  std::size_t remaining = 0;
  CycleReport report;
  std::promise<CycleReport> done;
};

}  // namespace

std::shared_future<CycleReport> RecEngine::start_cycle() {
  auto state = std::make_shared<CycleState>();
  std::shared_future<CycleReport> future = state->done.get_future().share();

  const std::uint64_t cycle = cycle_counter_.fetch_add(1, std::memory_order_relaxed);
  const auto users = store_.user_ids();
  const auto batches = dispatch(users, mix_seed(config_.seed, cycle), config_.batch_size);
  state->report.cycle = cycle;
  state->report.started_at = clock_.now();
  state->report.batches = batches.size();
  state->remaining = batches.size();
  if (batches.empty()) {
    state->done.set_value(state->report);
    return future;
  }

  for (const auto& batch : batches) {
    pool_.submit([this, state, batch] {
      std::size_t failures = 0;
      std::vector<store::RecommendationList> served;
      for (const auto& user : batch.user_ids) {
        try {
          auto result = generate(user, true);
          if (!result.ok) {
            ++failures;
            continue;
          }
          for (auto& list : result.lists) {
            if (list.algorithm_id == config_.served_algorithm) served.push_back(std::move(list));
          }
        } catch (const std::exception& e) {
          ++failures;
          failures_.fetch_add(1, std::memory_order_relaxed);
          LOG(ERROR) << "generation failed for " << user << ": " << e.what();
        }
      }
      bool default_updated = false;
      if (batch.is_default_feed_batch) {
        try {
          default_updated = build_default_feed(served).has_value();
        } catch (const std::exception& e) {
          LOG(ERROR) << "default feed rebuild failed: " << e.what();
        }
      }
      std::lock_guard lock(state->mu);
      state->report.users += batch.user_ids.size();
      state->report.failures += failures;
      state->report.default_feed_updated = state->report.default_feed_updated || default_updated;
      if (--state->remaining == 0) {
        cycles_.fetch_add(1, std::memory_order_relaxed);
        state->done.set_value(state->report);
      }
    });
  }
  return future;
}

CycleReport RecEngine::run_cycle() { return start_cycle().get(); }

void RecEngine::start_scheduler() {
  if (scheduler_) return;
  scheduler_ = std::make_unique<PeriodicTask>(config_.period, [this] {
    const auto cycle = start_cycle();
    (void)cycle;
  });
}

void RecEngine::stop_scheduler() {
  if (scheduler_) {
    scheduler_->stop();
    scheduler_.reset();
  }
}

void RecEngine::request_regeneration(const std::string& user_id) {
  if (user_id == store::kDefaultFeedUser) return;
  {
    std::lock_guard lock(regen_mu_);
    if (!regen_inflight_.insert(user_id).second) return;
  }
  pool_.submit([this, user_id] {
    try {
      generate(user_id, false);
    } catch (const std::exception& e) {
      LOG(ERROR) << "regeneration failed for " << user_id << ": " << e.what();
    }
    std::lock_guard lock(regen_mu_);
    regen_inflight_.erase(user_id);
  });
}

void RecEngine::wait_idle() { pool_.wait_idle(); }

EngineStats RecEngine::stats() const {
  return {generations_.load(), failures_.load(), counterfactuals_.load(), cycles_.load()};
}

}  // namespace paperfeed::rec
