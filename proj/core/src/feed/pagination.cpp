#include "paperfeed/feed/pagination.hpp"

#include <algorithm>
#include <charconv>

namespace paperfeed::feed {

std::size_t parse_cursor(std::optional<std::string_view> cursor) {
  if (!cursor || cursor->empty()) return 0;
  std::size_t value = 0;
  const auto* end = cursor->data() + cursor->size();
  const auto [ptr, ec] = std::from_chars(cursor->data(), end, value);
  if (ec != std::errc{} || ptr != end) return 0;
  return value;
}

FeedPage paginate(std::span<const std::string> items, std::size_t cursor, int limit) {
  FeedPage page;
  if (limit <= 0 || cursor >= items.size()) return page;
  const auto end = std::min(items.size(), cursor + static_cast<std::size_t>(limit));
  page.post_uris.assign(items.begin() + static_cast<std::ptrdiff_t>(cursor),
                        items.begin() + static_cast<std::ptrdiff_t>(end));
  if (end < items.size()) page.next_cursor = std::to_string(end);
  return page;
}

}  // namespace paperfeed::feed
