#include "paperfeed/harness/follows_stub.hpp"

#include "paperfeed/feed/service.hpp"

namespace paperfeed::harness {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

StubFollowsClient::StubFollowsClient(std::map<std::string, std::vector<std::string>> table, LatencyModel model,
                                     Sleeper sleeper)
    : table_(std::move(table)), model_(model), sleep_(std::move(sleeper)) {}

std::vector<std::string> StubFollowsClient::get_follows(const std::string& user_id) {
  calls_.fetch_add(1, std::memory_order_relaxed);
  if (feed::on_serving_path()) serving_calls_.fetch_add(1, std::memory_order_relaxed);
  if (sleep_ && model_.latency > Duration::zero()) sleep_(model_.latency);

  std::lock_guard lock(mu_);
  bool fail = false;
  if (fail_next_ > 0) {
    --fail_next_;
    fail = true;
  } else if (failing_users_.contains(user_id)) {
    fail = true;
  } else if (model_.failure_rate > 0.0) {
    // Keyed on (user, nth call for that user) so concurrent callers see the
    // same outcomes in any interleaving.
    const auto nth = user_calls_[user_id]++;
    const auto draw = mix_seed(mix_seed(model_.seed, fnv1a(user_id)), nth);
    fail = static_cast<double>(draw >> 11) * 0x1.0p-53 < model_.failure_rate;
  }
  if (fail) {
    failures_.fetch_add(1, std::memory_order_relaxed);
    throw rec::FollowsUnavailable("follows lookup failed for " + user_id);
  }
  const auto it = table_.find(user_id);
  return it == table_.end() ? std::vector<std::string>{} : it->second;
}

void StubFollowsClient::fail_next(int n) {
  std::lock_guard lock(mu_);
  fail_next_ = n;
}

void StubFollowsClient::fail_user(const std::string& user_id) {
  std::lock_guard lock(mu_);
  failing_users_.insert(user_id);
}

void StubFollowsClient::clear_failures() {
  std::lock_guard lock(mu_);
  fail_next_ = 0;
  failing_users_.clear();
}

void StubFollowsClient::set_follows(const std::string& user_id, std::vector<std::string> follows) {
  std::lock_guard lock(mu_);
  table_[user_id] = std::move(follows);
}

}  // namespace paperfeed::harness
