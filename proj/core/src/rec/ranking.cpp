#include "paperfeed/rec/ranking.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace paperfeed::rec {

bool ranks_before(const store::RankedPost& a, const store::RankedPost& b) {
  if (a.ranked_at != b.ranked_at) return a.ranked_at > b.ranked_at;
  return a.uri < b.uri;
}

namespace {

// Sorts newest first and keeps the first occurrence of each uri.
void sort_dedup(std::vector<store::RankedPost>& items) {
  std::stable_sort(items.begin(), items.end(), ranks_before);
  std::unordered_set<std::string> seen;
  std::erase_if(items, [&](const store::RankedPost& p) { return !seen.insert(p.uri).second; });
}

}  // namespace

std::vector<store::RankedPost> rank_following(const store::Store& store, std::span<const std::string> follows,
                                              const Algorithm& algorithm, const RankingLimits& limits) {
  const std::set<std::string> accounts(follows.begin(), follows.end());
  std::vector<store::RankedPost> all;
  for (const auto& account : accounts) {
    auto mine = store.recent_post_refs_by_author(account, limits.per_author_cap, algorithm.include_quotes);
    if (algorithm.include_reposts) {
      for (auto& repost : store.recent_repost_refs_by_actor(account, limits.per_author_cap)) {
        mine.push_back(std::move(repost));
      }
      sort_dedup(mine);
      if (mine.size() > limits.per_author_cap) mine.resize(limits.per_author_cap);
    }
    all.insert(all.end(), std::make_move_iterator(mine.begin()), std::make_move_iterator(mine.end()));
  }
  sort_dedup(all);
  if (all.size() > limits.list_cap) all.resize(limits.list_cap);
  return all;
}

std::vector<store::RankedPost> merge_newest(std::span<const store::RecommendationList> lists, std::size_t cap) {
  std::vector<store::RankedPost> all;
  for (const auto& list : lists) all.insert(all.end(), list.items.begin(), list.items.end());
  sort_dedup(all);
  if (all.size() > cap) all.resize(cap);
  return all;
}

}  // namespace paperfeed::rec
