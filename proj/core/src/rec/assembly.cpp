#include "paperfeed/rec/assembly.hpp"

#include <unordered_set>

namespace paperfeed::rec {

AssemblyFlags assembly_flags(const store::UserRecord& user) {
  return {.show_consent = user.consent_views < store::kConsentVisits,
          .show_onboarding = user.access_count < kOnboardingVisits};
}

std::vector<std::string> assemble_served_list(const AssemblyFlags& flags, std::span<const std::string> body,
                                              std::span<const std::string> default_feed,
                                              const SystemPosts& system_posts) {
  std::vector<std::string> out;
  out.reserve(body.size() + default_feed.size() + 3);
  if (flags.show_consent) out.push_back(system_posts.consent_thread);
  if (flags.show_onboarding) out.push_back(system_posts.onboarding);
  out.insert(out.end(), body.begin(), body.end());
  if (body.size() < kLowContentThreshold) {
    out.push_back(system_posts.follow_more);
    const std::unordered_set<std::string_view> in_body(body.begin(), body.end());
    for (const auto& uri : default_feed) {
      if (!in_body.contains(uri)) out.push_back(uri);
    }
  }
  return out;
}

std::vector<std::string> assemble_served_list(const store::UserRecord& user,
                                              const store::RecommendationList* recs,
                                              std::span<const std::string> default_feed,
                                              const SystemPosts& system_posts) {
  const std::vector<std::string> body = recs ? recs->uris() : std::vector<std::string>{};
  return assemble_served_list(assembly_flags(user), body, default_feed, system_posts);
}

}  // namespace paperfeed::rec
