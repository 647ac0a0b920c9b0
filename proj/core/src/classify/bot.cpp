#include "paperfeed/classify/bot.hpp"

#include <string>

#include "paperfeed/classify/classifier.hpp"

namespace paperfeed::classify {

bool is_bot_account(std::string_view handle, double posts_per_day, double threshold) {
  const std::string lower = normalize_text(handle);
  return lower.find("arxiv") != std::string::npos || lower.find("bot") != std::string::npos ||
         posts_per_day > threshold;
}

}  // namespace paperfeed::classify
