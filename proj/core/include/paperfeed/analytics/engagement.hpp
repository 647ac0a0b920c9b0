#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "paperfeed/analytics/bootstrap.hpp"
#include "paperfeed/store/types.hpp"

namespace paperfeed::analytics {

struct EngagementOptions {
  /// Seconds after an access within which an interaction counts; nullopt
  /// matches interactions at any time.
  std::optional<double> window_seconds = 30.0;
  int page_size_filter = 30;
  std::size_t bootstrap_samples = kDefaultBootstrapSamples;
  std::uint64_t seed = 7;
};

struct RankEngagement {
  int rank = 0;
  store::InteractionKind kind = store::InteractionKind::like;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t n_pairs = 0;
  std::uint64_t n_engaged = 0;
};

/// Engagement rate by the highest feed position at which a user saw a post.
///
/// Only accesses whose limit equals the page-size filter count. Each
/// (user, post) pair is placed at its minimum 1-based position
/// (cursor + index + 1) over those accesses, and is engaged for a kind when
/// the user has an interaction of that kind on the post at or after some
/// qualifying access and within the window. Intervals come from a
/// user-clustered percentile bootstrap. Rows are ordered by kind (likes
/// first) then rank; ranks with no pairs are omitted.
std::vector<RankEngagement> engagement_by_rank(std::span<const store::AccessLog> access_logs,
                                               std::span<const store::InteractionRecord> interactions,
                                               const EngagementOptions& options);

/// Ratio rate(numerator) / rate(denominator) for one kind with a bootstrap
/// interval from the same user resamples as engagement_by_rank.
struct RateRatio {
  double ratio = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};
RateRatio rank_rate_ratio(std::span<const store::AccessLog> access_logs,
                          std::span<const store::InteractionRecord> interactions, const EngagementOptions& options,
                          store::InteractionKind kind, int numerator_rank, int denominator_rank);

}  // namespace paperfeed::analytics
