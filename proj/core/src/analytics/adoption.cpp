#include "paperfeed/analytics/adoption.hpp"

#include <cmath>
#include <map>

namespace paperfeed::analytics {

namespace {

constexpr Duration kWeek = std::chrono::days(7);
constexpr double kZ95 = 1.96;

struct WindowCounts {
  std::uint64_t paper = 0;
  std::uint64_t total = 0;
};

WindowCounts count_in(const UserActivity& user, Timestamp from, Timestamp to) {
  WindowCounts c;
  for (const auto& like : user.likes) {
    if (like.at >= from && like.at < to) {
      ++c.total;
      if (like.is_paper) ++c.paper;
    }
  }
  return c;
}

void summarize(std::span<const double> values, double& m, double& se, Interval& ci) {
  m = mean(values);
  se = values.size() < 2 ? 0.0 : sample_sd(values) / std::sqrt(static_cast<double>(values.size()));
  ci = {m - kZ95 * se, m + kZ95 * se};
}

}  // namespace

std::vector<UserActivity> build_activity(std::span<const store::AccessLog> access_logs,
                                         std::span<const LikeEvent> likes) {
  std::map<std::string, UserActivity> users;
  for (const auto& log : access_logs) {
    auto [it, inserted] = users.try_emplace(log.user_id);
    auto& u = it->second;
    if (inserted) {
      u.user_id = log.user_id;
      u.first_access = log.requested_at;
    }
    u.first_access = std::min(u.first_access, log.requested_at);
    if (!log.cursor) ++u.accesses;
  }
  for (const auto& like : likes) {
    if (const auto it = users.find(like.user_id); it != users.end()) it->second.likes.push_back(like);
  }
  std::vector<UserActivity> out;
  out.reserve(users.size());
  for (auto& [id, u] : users) out.push_back(std::move(u));
  return out;
}

bool is_eligible(const UserActivity& user, const AdoptionThresholds& thresholds) {
  if (user.likes.size() >= thresholds.max_total_likes) return false;
  if (user.accesses <= thresholds.min_accesses || user.accesses >= thresholds.max_accesses) return false;
  const auto prior = count_in(user, user.first_access - 2 * kWeek, user.first_access - kWeek);
  return prior.paper >= 1 && prior.total > prior.paper;
}

AdoptionEffect adoption_effect(std::span<const UserActivity> users, const AdoptionThresholds& thresholds) {
  std::vector<double> count_diffs;
  std::vector<double> prop_diffs;
  for (const auto& user : users) {
    if (!is_eligible(user, thresholds)) continue;
    const auto before = count_in(user, user.first_access - kWeek, user.first_access);
    const auto after = count_in(user, user.first_access, user.first_access + kWeek);
    count_diffs.push_back(static_cast<double>(after.paper) - static_cast<double>(before.paper));
    if (before.total > 0 && after.total > 0) {
      prop_diffs.push_back(static_cast<double>(after.paper) / static_cast<double>(after.total) -
                           static_cast<double>(before.paper) / static_cast<double>(before.total));
    }
  }
  AdoptionEffect out;
  out.n_users = count_diffs.size();
  out.n_prop_users = prop_diffs.size();
  summarize(count_diffs, out.mean_count_diff, out.se_count_diff, out.ci_count);
  summarize(prop_diffs, out.mean_prop_diff, out.se_prop_diff, out.ci_prop);
  return out;
}

}  // namespace paperfeed::analytics
