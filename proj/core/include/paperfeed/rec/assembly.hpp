#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "paperfeed/store/types.hpp"

namespace paperfeed::rec {

/// URIs of the operator-published system posts.
struct SystemPosts {
  std::string refresh_prompt;
  std::string consent_thread;
  std::string onboarding;
  std::string follow_more;
};

inline constexpr std::uint64_t kOnboardingVisits = 10;
inline constexpr std::size_t kLowContentThreshold = 10;

struct AssemblyFlags {
  bool show_consent = false;
  bool show_onboarding = false;

  bool operator==(const AssemblyFlags&) const = default;
};

AssemblyFlags assembly_flags(const store::UserRecord& user);

/// Served order: consent thread (while consent_views < 5), onboarding post
/// (while access_count < 10), the recommendation body untouched, then, when
/// the body has fewer than 10 posts, the follow-more post followed by the
/// default feed minus anything already in the body.
std::vector<std::string> assemble_served_list(const AssemblyFlags& flags, std::span<const std::string> body,
                                              std::span<const std::string> default_feed,
                                              const SystemPosts& system_posts);

std::vector<std::string> assemble_served_list(const store::UserRecord& user,
                                              const store::RecommendationList* recs,
                                              std::span<const std::string> default_feed,
                                              const SystemPosts& system_posts);

}  // namespace paperfeed::rec
