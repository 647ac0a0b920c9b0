#pragma once

#include <string_view>

namespace paperfeed::classify {

inline constexpr double kDefaultBotPostsPerDay = 100.0;

/// Accounts whose handle mentions "arxiv" or "bot" (any case), or that post
/// more than `threshold` times per day.
bool is_bot_account(std::string_view handle, double posts_per_day,
                    double threshold = kDefaultBotPostsPerDay);

}  // namespace paperfeed::classify
