#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "paperfeed/store/types.hpp"

namespace paperfeed::testing {

// Brute-force reverse-chronological ranking straight off full tables: no
// indexes, no early cut-offs. Each followed account contributes its 10
// newest entries (own posts, plus reposts at repost time when enabled),
// a post keeps its newest entry, and the union is cut to `list_cap`.
struct OracleAlgorithm {
  bool include_reposts = false;
  bool include_quotes = false;
};

inline bool oracle_before(const store::RankedPost& a, const store::RankedPost& b) {
  if (a.ranked_at != b.ranked_at) return a.ranked_at > b.ranked_at;
  return a.uri < b.uri;
}

inline std::vector<store::RankedPost> newest_unique(std::vector<store::RankedPost> entries, std::size_t cap) {
  std::sort(entries.begin(), entries.end(), oracle_before);
  std::vector<store::RankedPost> out;
  std::set<std::string> seen;
  for (auto& e : entries) {
    if (out.size() == cap) break;
    if (seen.insert(e.uri).second) out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<store::RankedPost> oracle_ranking(const std::vector<store::StoredPost>& posts,
                                                     const std::vector<store::InteractionRecord>& interactions,
                                                     const std::vector<std::string>& follows, OracleAlgorithm algo,
                                                     std::size_t per_author_cap = 10, std::size_t list_cap = 150) {
  std::map<std::string, const store::StoredPost*> by_uri;
  for (const auto& p : posts) by_uri[p.uri] = &p;

  std::vector<store::RankedPost> all;
  for (const auto& account : std::set<std::string>(follows.begin(), follows.end())) {
    std::vector<store::RankedPost> mine;
    for (const auto& p : posts) {
      if (p.author_id != account || p.deleted) continue;
      if (p.quote_of && !algo.include_quotes) continue;
      mine.push_back({p.uri, p.created_at});
    }
    if (algo.include_reposts) {
      for (const auto& i : interactions) {
        if (i.actor_id != account || i.kind != store::InteractionKind::repost) continue;
        const auto it = by_uri.find(i.subject_uri);
        if (it == by_uri.end() || it->second->deleted) continue;
        mine.push_back({i.subject_uri, i.created_at});
      }
    }
    for (auto& e : newest_unique(std::move(mine), per_author_cap)) all.push_back(std::move(e));
  }
  return newest_unique(std::move(all), list_cap);
}

}  // namespace paperfeed::testing
