#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "paperfeed/store/store.hpp"

namespace paperfeed::rec {

inline constexpr std::string_view kReverseChronological = "reverse_chronological";
inline constexpr std::string_view kWithRepostsAndQuotes = "reverse_chronological_reposts_quotes";

struct Algorithm {
  std::string algorithm_id{kReverseChronological};
  bool include_reposts = false;
  bool include_quotes = false;

  static Algorithm reverse_chronological() { return {}; }
  static Algorithm with_reposts_and_quotes() { return {std::string(kWithRepostsAndQuotes), true, true}; }

  bool operator==(const Algorithm&) const = default;
};

struct RankingLimits {
  std::size_t per_author_cap = 10;
  std::size_t list_cap = store::kMaxRecommendations;
};

/// Newest first; equal times ordered by uri ascending.
bool ranks_before(const store::RankedPost& a, const store::RankedPost& b);

/// Reverse-chronological ranking over followed accounts.
///
/// Each followed account contributes at most `per_author_cap` entries: its
/// newest non-deleted paper posts (quote posts only when the algorithm
/// includes quotes) and, when the algorithm includes reposts, the posts it
/// reposted, ranked at repost time. The union is sorted newest first,
/// deduplicated by uri (keeping the newest entry) and cut to `list_cap`.
std::vector<store::RankedPost> rank_following(const store::Store& store, std::span<const std::string> follows,
                                              const Algorithm& algorithm, const RankingLimits& limits);

/// Union of lists, deduplicated by uri (newest entry wins), sorted newest
/// first and truncated to `cap`.
std::vector<store::RankedPost> merge_newest(std::span<const store::RecommendationList> lists, std::size_t cap);

}  // namespace paperfeed::rec
