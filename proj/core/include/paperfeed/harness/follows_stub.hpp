#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "paperfeed/common/random.hpp"
#include "paperfeed/common/time.hpp"
#include "paperfeed/rec/follows.hpp"

namespace paperfeed::harness {

struct LatencyModel {
  Duration latency{0};
  double failure_rate = 0.0;
  std::uint64_t seed = 1;
};

/// Follows client backed by a table, with injected latency, seeded random
/// failures, scripted failures and call accounting.
class StubFollowsClient : public rec::FollowsClient {
 public:
  using Sleeper = std::function<void(Duration)>;

  StubFollowsClient(std::map<std::string, std::vector<std::string>> table, LatencyModel model = {},
                    Sleeper sleeper = {});

  std::vector<std::string> get_follows(const std::string& user_id) override;

  /// The next `n` calls fail regardless of the failure rate.
  void fail_next(int n);
  /// Calls for this user fail until cleared.
  void fail_user(const std::string& user_id);
  void clear_failures();

  void set_follows(const std::string& user_id, std::vector<std::string> follows);

  std::uint64_t calls() const { return calls_.load(); }
  std::uint64_t failures() const { return failures_.load(); }
  /// Calls made from inside a feed request.
  std::uint64_t serving_path_calls() const { return serving_calls_.load(); }

 private:
  std::mutex mu_;
  std::map<std::string, std::vector<std::string>> table_;
  LatencyModel model_;
  Sleeper sleep_;
  std::map<std::string, std::uint64_t> user_calls_;
  int fail_next_ = 0;
  std::set<std::string> failing_users_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> failures_{0};
  std::atomic<std::uint64_t> serving_calls_{0};
};

}  // namespace paperfeed::harness
