#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paperfeed/common/time.hpp"

namespace paperfeed::store {

/// A classified paper post. `deleted` posts stay readable by uri but drop
/// out of the author index.
struct StoredPost {
  std::string uri;
  std::string author_id;
  std::string text;
  std::vector<std::string> links;
  std::vector<std::string> arxiv_ids;
  Timestamp created_at{};
  bool deleted = false;
  Timestamp ingested_at{};
  std::optional<std::string> reply_parent;
  std::optional<std::string> quote_of;

  bool operator==(const StoredPost&) const = default;
};

enum class InteractionKind { like, repost };

std::string_view to_string(InteractionKind kind);
InteractionKind parse_interaction_kind(std::string_view text);

struct InteractionRecord {
  std::string actor_id;
  std::string subject_uri;
  InteractionKind kind = InteractionKind::like;
  Timestamp created_at{};

  bool operator==(const InteractionRecord&) const = default;
};

inline constexpr int kConsentVisits = 5;

struct UserRecord {
  std::string user_id;
  Timestamp first_access_at{};
  std::uint64_t access_count = 0;
  int consent_views = 0;
  bool opted_out = false;
  std::optional<Timestamp> opted_out_at;

  bool operator==(const UserRecord&) const = default;
};

/// One ranked entry. `ranked_at` is the post's creation time, or the repost
/// time when the entry came in through a repost.
struct RankedPost {
  std::string uri;
  Timestamp ranked_at{};

  bool operator==(const RankedPost&) const = default;
};

inline constexpr std::size_t kMaxRecommendations = 150;

struct RecommendationList {
  std::string user_id;
  std::string algorithm_id;
  std::vector<RankedPost> items;
  Timestamp generated_at{};

  std::vector<std::string> uris() const;

  bool operator==(const RecommendationList&) const = default;
};

/// Top of one algorithm's ranking at one generation time. A time series:
/// keyed by (user, algorithm, generated_at) and never overwritten.
struct CounterfactualRecord {
  std::string user_id;
  std::string algorithm_id;
  Timestamp generated_at{};
  std::vector<std::string> post_uris;

  bool operator==(const CounterfactualRecord&) const = default;
};

struct AccessLog {
  std::string user_id;
  Timestamp requested_at{};
  int limit = 0;
  std::optional<std::string> cursor;
  std::vector<std::string> served_uris;

  bool operator==(const AccessLog&) const = default;
};

}  // namespace paperfeed::store
