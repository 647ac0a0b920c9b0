#include "paperfeed/analytics/usage.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace paperfeed::analytics {

namespace {

constexpr Duration kDay = std::chrono::days(1);
constexpr Duration kWeek = std::chrono::days(7);

}  // namespace

UsageSummary usage_summary(std::span<const store::AccessLog> access_logs, const UsageOptions& options) {
  UsageSummary out;
  if (access_logs.empty()) return out;

  Timestamp first = access_logs.front().requested_at;
  Timestamp last = first;
  for (const auto& log : access_logs) {
    first = std::min(first, log.requested_at);
    last = std::max(last, log.requested_at);
  }
  const Timestamp origin = day_floor(first);
  const Timestamp end = day_floor(last) + kDay;

  struct Bucket {
    std::set<std::string> users;
    std::uint64_t sessions = 0;
  };
  std::map<Timestamp, Bucket> days;
  std::map<Timestamp, Bucket> weeks;
  struct UserUsage {
    Timestamp first_access;
    std::vector<Timestamp> sessions;
  };
  std::map<std::string, UserUsage> users;

  for (const auto& log : access_logs) {
    const bool session = !log.cursor.has_value();
    const Timestamp day = day_floor(log.requested_at);
    const Timestamp week = origin + ((log.requested_at - origin) / kWeek) * kWeek;
    days[day].users.insert(log.user_id);
    weeks[week].users.insert(log.user_id);
    auto [it, inserted] = users.try_emplace(log.user_id, UserUsage{log.requested_at, {}});
    it->second.first_access = std::min(it->second.first_access, log.requested_at);
    if (session) {
      ++days[day].sessions;
      ++weeks[week].sessions;
      it->second.sessions.push_back(log.requested_at);
      ++out.total_sessions;
    }
  }
  for (const auto& [day, b] : days) out.daily.push_back({day, b.users.size(), b.sessions});
  for (const auto& [week, b] : weeks) out.weekly.push_back({week, b.users.size(), b.sessions});

  // Rank users by total sessions (ties by id) and split into equal-width
  // percentile groups.
  std::vector<const std::pair<const std::string, UserUsage>*> ranked;
  for (const auto& entry : users) ranked.push_back(&entry);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto* a, const auto* b) { return a->second.sessions.size() < b->second.sessions.size(); });

  const int groups = std::max(1, options.groups);
  std::vector<std::vector<const UserUsage*>> grouped(static_cast<std::size_t>(groups));
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto g = i * static_cast<std::size_t>(groups) / ranked.size();
    grouped[g].push_back(&ranked[i]->second);
  }
  for (int g = 0; g < groups; ++g) {
    Trajectory t;
    t.percentile_low = 100.0 * g / groups;
    t.percentile_high = 100.0 * (g + 1) / groups;
    for (int w = 0; w < options.weeks; ++w) {
      std::vector<double> counts;
      for (const auto* u : grouped[static_cast<std::size_t>(g)]) {
        const Timestamp from = u->first_access + w * kWeek;
        const Timestamp to = from + kWeek;
        if (to > end) continue;
        counts.push_back(static_cast<double>(
            std::count_if(u->sessions.begin(), u->sessions.end(), [&](Timestamp s) { return s >= from && s < to; })));
      }
      if (counts.empty()) continue;
      TrajectoryPoint p;
      p.week = w;
      p.n_users = counts.size();
      p.mean_sessions = mean(counts);
      const double se = counts.size() < 2 ? 0.0 : sample_sd(counts) / std::sqrt(static_cast<double>(counts.size()));
      p.ci = {p.mean_sessions - 1.96 * se, p.mean_sessions + 1.96 * se};
      t.points.push_back(p);
    }
    out.trajectories.push_back(std::move(t));
  }
  return out;
}

}  // namespace paperfeed::analytics
