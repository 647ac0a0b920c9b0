#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "paperfeed/analytics/bootstrap.hpp"
#include "paperfeed/classify/arxiv.hpp"
#include "paperfeed/store/types.hpp"

namespace paperfeed::analytics {

struct CategoryOptions {
  /// Only each paper's first-listed category instead of all of them.
  bool primary_only = false;
  std::size_t top_k = 10;
  std::size_t bootstrap_samples = kDefaultBootstrapSamples;
  std::uint64_t seed = 7;
};

struct CategoryShare {
  double share = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

using Distribution = std::map<std::string, CategoryShare>;

struct CategoryDistributions {
  Distribution corpus;
  Distribution shown;
  Distribution liked;
  /// Union of each distribution's top categories, sorted by corpus share.
  std::vector<std::string> reported;
};

/// Exposure or like of a post by a user.
struct UserPost {
  std::string user_id;
  std::string uri;
};

/// arXiv category mix of (a) the corpus, (b) posts shown to users and
/// (c) posts liked by users. Only posts from non-bot authors whose arXiv
/// ids resolve to at least one category count. A post with k distinct
/// categories adds 1/k to each; shown and liked count a post once per user.
/// Intervals resample posts for (a) and users for (b) and (c). Throws
/// ValidationError naming an empty population.
CategoryDistributions category_distribution(std::span<const store::StoredPost> posts,
                                            std::span<const UserPost> shown, std::span<const UserPost> liked,
                                            const classify::ArxivCatalog& catalog,
                                            const std::unordered_set<std::string>& bot_authors,
                                            const CategoryOptions& options = {});

/// Per-user distinct exposures from access logs.
std::vector<UserPost> exposures_from_logs(std::span<const store::AccessLog> access_logs);
std::vector<UserPost> likes_from_interactions(std::span<const store::InteractionRecord> interactions);

/// Authors posting more than `posts_per_day` over the corpus time span.
/// Handle-based detection needs handles the exports do not carry; pass
/// those in separately.
std::unordered_set<std::string> high_volume_authors(std::span<const store::StoredPost> posts, double posts_per_day);

}  // namespace paperfeed::analytics
