#include "paperfeed/analytics/engagement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>

#include "paperfeed/feed/pagination.hpp"

namespace paperfeed::analytics {

namespace {

constexpr std::size_t kKinds = 2;

std::size_t kind_index(store::InteractionKind k) { return k == store::InteractionKind::like ? 0 : 1; }

struct Cell {
  std::uint64_t pairs = 0;
  std::uint64_t engaged[kKinds] = {0, 0};
};

// Per-user counts indexed by rank - 1.
struct Table {
  int max_rank = 0;
  std::vector<std::vector<Cell>> users;
};

Table tabulate(std::span<const store::AccessLog> logs, std::span<const store::InteractionRecord> interactions,
               const EngagementOptions& options) {
  struct Exposure {
    int rank = std::numeric_limits<int>::max();
    std::vector<Timestamp> accessed;
  };
  // Ordered maps keep user order, and therefore bootstrap draws, stable.
  std::map<std::string, std::unordered_map<std::string, Exposure>> exposures;
  for (const auto& log : logs) {
    if (log.limit != options.page_size_filter) continue;
    const auto offset = static_cast<long long>(feed::parse_cursor(log.cursor));
    auto& user = exposures[log.user_id];
    for (std::size_t i = 0; i < log.served_uris.size(); ++i) {
      auto& e = user[log.served_uris[i]];
      e.rank = std::min(e.rank, static_cast<int>(offset + static_cast<long long>(i) + 1));
      e.accessed.push_back(log.requested_at);
    }
  }

  std::unordered_map<std::string, std::unordered_map<std::string, std::vector<std::pair<std::size_t, Timestamp>>>>
      acts;
  for (const auto& r : interactions) {
    if (!exposures.contains(r.actor_id)) continue;
    acts[r.actor_id][r.subject_uri].emplace_back(kind_index(r.kind), r.created_at);
  }

  const bool any_time = !options.window_seconds.has_value();
  const double window_us = any_time ? 0.0 : *options.window_seconds * 1e6;
  const auto within = [&](Timestamp access, Timestamp at) {
    if (any_time) return true;
    return at >= access && static_cast<double>((at - access).count()) <= window_us;
  };

  Table table;
  for (const auto& [user, posts] : exposures) {
    for (const auto& [uri, e] : posts) table.max_rank = std::max(table.max_rank, e.rank);
  }
  for (const auto& [user, posts] : exposures) {
    std::vector<Cell> cells(static_cast<std::size_t>(table.max_rank));
    const auto user_acts = acts.find(user);
    for (const auto& [uri, e] : posts) {
      Cell& c = cells[static_cast<std::size_t>(e.rank - 1)];
      ++c.pairs;
      if (user_acts == acts.end()) continue;
      const auto post_acts = user_acts->second.find(uri);
      if (post_acts == user_acts->second.end()) continue;
      bool hit[kKinds] = {false, false};
      for (const auto& [kind, at] : post_acts->second) {
        for (const auto access : e.accessed) {
          if (within(access, at)) {
            hit[kind] = true;
            break;
          }
        }
      }
      for (std::size_t k = 0; k < kKinds; ++k) c.engaged[k] += hit[k] ? 1 : 0;
    }
    table.users.push_back(std::move(cells));
  }
  return table;
}

std::vector<Cell> totals(const Table& t, std::span<const std::size_t> picks) {
  std::vector<Cell> sum(static_cast<std::size_t>(t.max_rank));
  for (const auto u : picks) {
    const auto& cells = t.users[u];
    for (std::size_t r = 0; r < cells.size(); ++r) {
      sum[r].pairs += cells[r].pairs;
      for (std::size_t k = 0; k < kKinds; ++k) sum[r].engaged[k] += cells[r].engaged[k];
    }
  }
  return sum;
}

double rate_of(const Cell& c, std::size_t kind) {
  return c.pairs == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : static_cast<double>(c.engaged[kind]) / static_cast<double>(c.pairs);
}

std::vector<std::size_t> identity(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

std::vector<RankEngagement> engagement_by_rank(std::span<const store::AccessLog> access_logs,
                                               std::span<const store::InteractionRecord> interactions,
                                               const EngagementOptions& options) {
  const Table table = tabulate(access_logs, interactions, options);
  if (table.users.empty()) return {};
  const auto point = totals(table, identity(table.users.size()));

  const auto ranks = static_cast<std::size_t>(table.max_rank);
  std::vector<std::vector<double>> replicates(kKinds * ranks);
  Rng rng(options.seed);
  for (std::size_t b = 0; b < options.bootstrap_samples; ++b) {
    const auto sample = totals(table, resample_indices(table.users.size(), rng));
    for (std::size_t k = 0; k < kKinds; ++k) {
      for (std::size_t r = 0; r < ranks; ++r) replicates[k * ranks + r].push_back(rate_of(sample[r], k));
    }
  }

  std::vector<RankEngagement> out;
  for (std::size_t k = 0; k < kKinds; ++k) {
    for (std::size_t r = 0; r < ranks; ++r) {
      if (point[r].pairs == 0) continue;
      RankEngagement row;
      row.rank = static_cast<int>(r + 1);
      row.kind = k == 0 ? store::InteractionKind::like : store::InteractionKind::repost;
      row.rate = rate_of(point[r], k);
      row.n_pairs = point[r].pairs;
      row.n_engaged = point[r].engaged[k];
      const auto ci = percentile_interval(replicates[k * ranks + r], row.rate);
      row.ci_low = ci.low;
      row.ci_high = ci.high;
      out.push_back(row);
    }
  }
  return out;
}

RateRatio rank_rate_ratio(std::span<const store::AccessLog> access_logs,
                          std::span<const store::InteractionRecord> interactions, const EngagementOptions& options,
                          store::InteractionKind kind, int numerator_rank, int denominator_rank) {
  const Table table = tabulate(access_logs, interactions, options);
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  if (table.users.empty() || numerator_rank < 1 || denominator_rank < 1 || numerator_rank > table.max_rank ||
      denominator_rank > table.max_rank) {
    return {nan, nan, nan};
  }
  const std::size_t k = kind_index(kind);
  const auto ratio = [&](const std::vector<Cell>& cells) {
    const double den = rate_of(cells[static_cast<std::size_t>(denominator_rank - 1)], k);
    const double num = rate_of(cells[static_cast<std::size_t>(numerator_rank - 1)], k);
    return den > 0.0 ? num / den : nan;
  };
  RateRatio out;
  out.ratio = ratio(totals(table, identity(table.users.size())));
  std::vector<double> replicates;
  Rng rng(options.seed);
  for (std::size_t b = 0; b < options.bootstrap_samples; ++b) {
    replicates.push_back(ratio(totals(table, resample_indices(table.users.size(), rng))));
  }
  const auto ci = percentile_interval(replicates, out.ratio);
  out.ci_low = ci.low;
  out.ci_high = ci.high;
  return out;
}

}  // namespace paperfeed::analytics
