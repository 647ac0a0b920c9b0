#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace paperfeed::feed {

inline constexpr int kMinLimit = 1;
inline constexpr int kMaxLimit = 100;

struct FeedPage {
  std::vector<std::string> post_uris;
  /// Absent exactly when the page reaches the end of the list.
  std::optional<std::string> next_cursor;

  bool operator==(const FeedPage&) const = default;
};

/// Decimal index into the served list. Missing or malformed cursors read
/// as 0.
std::size_t parse_cursor(std::optional<std::string_view> cursor);

/// Items [cursor, cursor + limit) with next_cursor = cursor + limit when
/// items remain past the page. A cursor past the end gives an empty
/// terminal page.
FeedPage paginate(std::span<const std::string> items, std::size_t cursor, int limit);

}  // namespace paperfeed::feed
