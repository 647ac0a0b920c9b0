#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "paperfeed/analytics/bootstrap.hpp"
#include "paperfeed/common/time.hpp"
#include "paperfeed/store/types.hpp"

namespace paperfeed::analytics {

/// One like by a user, on any post, with whether the post is a paper post.
struct LikeEvent {
  std::string user_id;
  Timestamp at{};
  bool is_paper = false;
};

struct AdoptionThresholds {
  std::uint64_t max_total_likes = 10'000;  // exclusive
  std::uint64_t min_accesses = 5;          // exclusive
  std::uint64_t max_accesses = 20'000;     // exclusive
};

struct UserActivity {
  std::string user_id;
  Timestamp first_access{};
  /// Sessions: requests without a cursor.
  std::uint64_t accesses = 0;
  std::vector<LikeEvent> likes;
};

struct AdoptionEffect {
  std::size_t n_users = 0;
  double mean_count_diff = 0.0;
  double se_count_diff = 0.0;
  Interval ci_count;
  /// Users with likes in both windows; the proportion statistic uses these.
  std::size_t n_prop_users = 0;
  double mean_prop_diff = 0.0;
  double se_prop_diff = 0.0;
  Interval ci_prop;
};

/// Groups likes and access logs per user. First access is the earliest
/// access log; users without logs are skipped.
std::vector<UserActivity> build_activity(std::span<const store::AccessLog> access_logs,
                                         std::span<const LikeEvent> likes);

/// Eligible: at least one paper like and one non-paper like in
/// [first - 14d, first - 7d), total likes and sessions within thresholds.
bool is_eligible(const UserActivity& user, const AdoptionThresholds& thresholds = {});

/// Paper-like count and paper-like share in the week after first access
/// minus the week before. Mean, SE = SD / sqrt(n), CI = mean +/- 1.96 SE.
AdoptionEffect adoption_effect(std::span<const UserActivity> users, const AdoptionThresholds& thresholds = {});

}  // namespace paperfeed::analytics
