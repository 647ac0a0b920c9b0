#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "paperfeed/analytics/bootstrap.hpp"
#include "paperfeed/common/time.hpp"
#include "paperfeed/store/types.hpp"

namespace paperfeed::analytics {

struct DailyUsage {
  Timestamp day{};
  std::uint64_t unique_users = 0;
  std::uint64_t sessions = 0;
};

struct WeeklyUsage {
  Timestamp week_start{};
  std::uint64_t unique_users = 0;
  std::uint64_t sessions = 0;
};

struct TrajectoryPoint {
  int week = 0;  // weeks since the user's first access
  std::size_t n_users = 0;
  double mean_sessions = 0.0;
  Interval ci;
};

struct Trajectory {
  /// Percentile range of total sessions, e.g. [0, 25).
  double percentile_low = 0.0;
  double percentile_high = 0.0;
  std::vector<TrajectoryPoint> points;
};

struct UsageOptions {
  int weeks = 16;
  /// Number of equal-width percentile groups.
  int groups = 4;
};

struct UsageSummary {
  std::vector<DailyUsage> daily;
  std::vector<WeeklyUsage> weekly;
  std::vector<Trajectory> trajectories;
  std::uint64_t total_sessions = 0;
  /// Sessions cannot be told apart from client pre-loads, so every count
  /// here is an upper bound on real usage.
  bool potential_overestimate = true;
};

/// A session is a request without a cursor. Weeks are 7-day blocks from
/// the first day in the data. A user contributes to trajectory week k only
/// when that whole week lies within the observed range. CIs are
/// mean +/- 1.96 SE.
UsageSummary usage_summary(std::span<const store::AccessLog> access_logs, const UsageOptions& options = {});

}  // namespace paperfeed::analytics
