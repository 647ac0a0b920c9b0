#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "paperfeed/analytics/adoption.hpp"
#include "paperfeed/analytics/bootstrap.hpp"
#include "paperfeed/analytics/categories.hpp"
#include "paperfeed/analytics/dataset.hpp"
#include "paperfeed/analytics/engagement.hpp"
#include "paperfeed/analytics/usage.hpp"
#include "paperfeed/common/errors.hpp"
#include "paperfeed/store/store.hpp"
#include "support/builders.hpp"

namespace paperfeed::analytics {
namespace {

using namespace std::chrono_literals;
using store::AccessLog;
using store::InteractionKind;
using store::InteractionRecord;
using testing::t0;

TEST(Bootstrap, QuantileInterpolatesLinearly) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({10, 20}, 0.25), 12.5);
  EXPECT_THROW(quantile({}, 0.5), ValidationError);
}

TEST(Bootstrap, PercentileIntervalContainsPoint) {
  std::vector<double> reps;
  for (int i = 0; i < 101; ++i) reps.push_back(i);
  const auto iv = percentile_interval(reps, 50.0);
  EXPECT_NEAR(iv.low, 2.5, 1e-9);
  EXPECT_NEAR(iv.high, 97.5, 1e-9);
  const auto widened = percentile_interval(reps, 99.0);
  EXPECT_DOUBLE_EQ(widened.high, 99.0);
  const std::vector<double> nans(3, std::numeric_limits<double>::quiet_NaN());
  const auto collapsed = percentile_interval(nans, 0.4);
  EXPECT_DOUBLE_EQ(collapsed.low, 0.4);
  EXPECT_DOUBLE_EQ(collapsed.high, 0.4);
}

TEST(Bootstrap, ResampleIsSeededAndInRange) {
  Rng a(1), b(1);
  const auto x = resample_indices(50, a);
  EXPECT_EQ(x, resample_indices(50, b));
  EXPECT_EQ(x.size(), 50u);
  for (auto i : x) EXPECT_LT(i, 50u);
}

TEST(Bootstrap, MeanAndSd) {
  const std::vector<double> v = {2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(v), 5.0);
  EXPECT_DOUBLE_EQ(sample_sd(v), std::sqrt(32.0 / 7.0));
  EXPECT_DOUBLE_EQ(sample_sd(std::vector<double>{3}), 0.0);
}

// u1 sees [A B C] then, an hour later, [C D]; u2 sees [A D]. A page of
// another size shows E to u2 and must be ignored.
struct EngagementFixture {
  std::vector<AccessLog> logs = {
      {"u1", t0(), 30, std::nullopt, {"A", "B", "C"}},
      {"u1", t0() + 1h, 30, std::nullopt, {"C", "D"}},
      {"u2", t0(), 30, std::nullopt, {"A", "D"}},
      {"u2", t0(), 10, std::nullopt, {"E"}},
  };
  std::vector<InteractionRecord> interactions = {
      {"u1", "A", InteractionKind::like, t0() + 10s},
      {"u1", "B", InteractionKind::like, t0() + 45s},
      {"u1", "D", InteractionKind::repost, t0() + 1h + 5s},
      {"u2", "D", InteractionKind::like, t0() + 20s},
      {"u2", "E", InteractionKind::like, t0() + 1s},
      {"u2", "A", InteractionKind::like, t0() - 1s},  // before the access
  };
};

const RankEngagement* row(const std::vector<RankEngagement>& rows, InteractionKind kind, int rank) {
  for (const auto& r : rows) {
    if (r.kind == kind && r.rank == rank) return &r;
  }
  return nullptr;
}

TEST(Engagement, HandComputedRatesWithThirtySecondWindow) {
  const EngagementFixture f;
  EngagementOptions options;
  options.bootstrap_samples = 200;
  const auto rows = engagement_by_rank(f.logs, f.interactions, options);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].kind, InteractionKind::like);
  EXPECT_EQ(rows[0].rank, 1);
  // Rank 1 pairs: (u1,A) (u1,C) (u2,A); rank 2: (u1,B) (u1,D) (u2,D).
  const auto* l1 = row(rows, InteractionKind::like, 1);
  const auto* l2 = row(rows, InteractionKind::like, 2);
  const auto* r1 = row(rows, InteractionKind::repost, 1);
  const auto* r2 = row(rows, InteractionKind::repost, 2);
  ASSERT_TRUE(l1 && l2 && r1 && r2);
  EXPECT_EQ(l1->n_pairs, 3u);
  EXPECT_EQ(l1->n_engaged, 1u);
  EXPECT_DOUBLE_EQ(l1->rate, 1.0 / 3.0);
  EXPECT_EQ(l2->n_engaged, 1u);
  EXPECT_EQ(r1->n_engaged, 0u);
  EXPECT_EQ(r2->n_engaged, 1u);
  for (const auto& r : rows) {
    EXPECT_LE(r.ci_low, r.rate);
    EXPECT_GE(r.ci_high, r.rate);
  }
}

TEST(Engagement, UnboundedWindowCountsLateLikes) {
  const EngagementFixture f;
  EngagementOptions options;
  options.window_seconds = std::nullopt;
  options.bootstrap_samples = 50;
  const auto rows = engagement_by_rank(f.logs, f.interactions, options);
  EXPECT_EQ(row(rows, InteractionKind::like, 2)->n_engaged, 2u);
  // (u2, A) was liked before any access but still counts: any time matches.
  EXPECT_EQ(row(rows, InteractionKind::like, 1)->n_engaged, 2u);
}

TEST(Engagement, CursorShiftsRanks) {
  const std::vector<AccessLog> logs = {{"u", t0(), 30, std::string("30"), {"X"}}};
  EngagementOptions options;
  options.bootstrap_samples = 10;
  const auto rows = engagement_by_rank(logs, {}, options);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].rank, 31);
}

TEST(Engagement, SeededBootstrapIsReproducible) {
  const EngagementFixture f;
  EngagementOptions options;
  options.bootstrap_samples = 100;
  const auto a = engagement_by_rank(f.logs, f.interactions, options);
  const auto b = engagement_by_rank(f.logs, f.interactions, options);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].ci_low, b[i].ci_low);
    EXPECT_EQ(a[i].ci_high, b[i].ci_high);
  }
}

TEST(Engagement, RatioOfRanks) {
  const EngagementFixture f;
  EngagementOptions options;
  options.window_seconds = std::nullopt;
  options.bootstrap_samples = 100;
  const auto ratio = rank_rate_ratio(f.logs, f.interactions, options, InteractionKind::like, 1, 2);
  EXPECT_DOUBLE_EQ(ratio.ratio, 1.0);
}

UserActivity activity(std::string id, std::uint64_t sessions,
                      std::vector<std::pair<Duration, bool>> likes_relative_to_first) {
  UserActivity u;
  u.user_id = std::move(id);
  u.first_access = t0() + std::chrono::days(30);
  u.accesses = sessions;
  for (const auto& [offset, paper] : likes_relative_to_first) u.likes.push_back({u.user_id, u.first_access + offset, paper});
  return u;
}

constexpr Duration kDay = std::chrono::days(1);

TEST(Adoption, EligibilityFilters) {
  // Prior window is [F-14d, F-7d).
  const auto good = activity("good", 6, {{-10 * kDay, true}, {-10 * kDay, false}});
  EXPECT_TRUE(is_eligible(good));
  EXPECT_FALSE(is_eligible(activity("no_nonpaper", 6, {{-10 * kDay, true}})));
  EXPECT_FALSE(is_eligible(activity("no_paper", 6, {{-10 * kDay, false}})));
  EXPECT_FALSE(is_eligible(activity("five_sessions", 5, {{-10 * kDay, true}, {-10 * kDay, false}})));
  EXPECT_FALSE(is_eligible(activity("too_many", 20000, {{-10 * kDay, true}, {-10 * kDay, false}})));
  EXPECT_TRUE(is_eligible(activity("edge_in", 6, {{-14 * kDay, true}, {-7 * kDay - 1us, false}})));
  EXPECT_FALSE(is_eligible(activity("edge_out", 6, {{-14 * kDay - 1us, true}, {-7 * kDay, false}})));
  AdoptionThresholds tight;
  tight.max_total_likes = 2;
  EXPECT_FALSE(is_eligible(good, tight));
}

TEST(Adoption, SingleUserHasZeroSe) {
  const std::vector<UserActivity> users = {
      activity("a", 6, {{-10 * kDay, true}, {-10 * kDay, false}, {-3 * kDay, true}, {1 * kDay, true}, {2 * kDay, true}})};
  const auto effect = adoption_effect(users);
  EXPECT_EQ(effect.n_users, 1u);
  EXPECT_DOUBLE_EQ(effect.mean_count_diff, 1.0);
  EXPECT_DOUBLE_EQ(effect.se_count_diff, 0.0);
  EXPECT_DOUBLE_EQ(effect.mean_prop_diff, 0.0);
}

TEST(Adoption, ProportionSkipsUsersWithEmptyWindows) {
  const std::vector<UserActivity> users = {
      activity("a", 6, {{-10 * kDay, true}, {-10 * kDay, false}, {1 * kDay, true}}),
      activity("b", 6, {{-10 * kDay, true}, {-10 * kDay, false}, {-1 * kDay, false}, {1 * kDay, true}}),
  };
  const auto effect = adoption_effect(users);
  EXPECT_EQ(effect.n_users, 2u);
  EXPECT_DOUBLE_EQ(effect.mean_count_diff, 1.0);
  EXPECT_EQ(effect.n_prop_users, 1u);
  EXPECT_DOUBLE_EQ(effect.mean_prop_diff, 1.0);
}

TEST(Adoption, BuildActivityCountsSessionsOnly) {
  const std::vector<AccessLog> logs = {
      {"u", t0() + 1h, 30, std::nullopt, {}},
      {"u", t0(), 30, std::nullopt, {}},
      {"u", t0() + 2h, 30, std::string("30"), {}},
  };
  const std::vector<LikeEvent> likes = {{"u", t0(), true}, {"v", t0(), true}};
  const auto out = build_activity(logs, likes);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].first_access, t0());
  EXPECT_EQ(out[0].accesses, 2u);
  EXPECT_EQ(out[0].likes.size(), 1u);
}

store::StoredPost arxiv_post(std::string uri, std::string author, std::vector<std::string> ids) {
  auto p = testing::paper_post(std::move(uri), std::move(author), t0());
  p.arxiv_ids = std::move(ids);
  return p;
}

TEST(Categories, FractionalWeightsAndBotExclusion) {
  classify::ArxivCatalog catalog;
  catalog.add("1", {"cs.LG", "stat.ML"});
  catalog.add("2", {"cs.LG"});
  catalog.add("3", {"q-bio.NC"});
  const std::vector<store::StoredPost> posts = {
      arxiv_post("p1", "alice", {"1"}),
      arxiv_post("p2", "alice", {"2"}),
      arxiv_post("p3", "bot", {"3"}),
      arxiv_post("p4", "alice", {"404"}),  // unknown id: not counted
  };
  const std::vector<UserPost> shown = {{"u", "p1"}, {"u", "p1"}, {"u", "p3"}, {"v", "p2"}};
  const std::vector<UserPost> liked = {{"u", "p2"}};
  CategoryOptions options;
  options.bootstrap_samples = 100;
  const auto d = category_distribution(posts, shown, liked, catalog, {"bot"}, options);
  EXPECT_DOUBLE_EQ(d.corpus.at("cs.LG").share, 0.75);
  EXPECT_DOUBLE_EQ(d.corpus.at("stat.ML").share, 0.25);
  EXPECT_EQ(d.corpus.count("q-bio.NC"), 0u);
  EXPECT_DOUBLE_EQ(d.shown.at("cs.LG").share, 0.75);
  EXPECT_DOUBLE_EQ(d.liked.at("cs.LG").share, 1.0);
  EXPECT_EQ(d.reported.front(), "cs.LG");

  options.primary_only = true;
  const auto primary = category_distribution(posts, shown, liked, catalog, {"bot"}, options);
  EXPECT_DOUBLE_EQ(primary.corpus.at("cs.LG").share, 1.0);
}

TEST(Categories, EmptyPopulationIsAnError) {
  classify::ArxivCatalog catalog;
  catalog.add("1", {"cs.LG"});
  const std::vector<store::StoredPost> posts = {arxiv_post("p1", "alice", {"1"})};
  const std::vector<UserPost> shown = {{"u", "p1"}};
  try {
    category_distribution(posts, shown, {}, catalog, {});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("liked"), std::string::npos);
  }
}

TEST(Categories, HelpersFromLogsAndInteractions) {
  const std::vector<AccessLog> logs = {{"u", t0(), 30, std::nullopt, {"a", "b"}},
                                       {"u", t0(), 30, std::nullopt, {"a"}}};
  EXPECT_EQ(exposures_from_logs(logs).size(), 2u);
  const std::vector<InteractionRecord> inter = {{"u", "a", InteractionKind::like, t0()},
                                                {"u", "b", InteractionKind::repost, t0()}};
  const auto likes = likes_from_interactions(inter);
  ASSERT_EQ(likes.size(), 1u);
  EXPECT_EQ(likes[0].uri, "a");

  std::vector<store::StoredPost> posts;
  for (int i = 0; i < 30; ++i) {
    auto p = testing::paper_post("x" + std::to_string(i), i < 25 ? "busy" : "calm", t0() + std::chrono::hours(i));
    posts.push_back(p);
  }
  // Span is 29 hours; busy posts 25 times, about 20.7 per day.
  EXPECT_EQ(high_volume_authors(posts, 20.0), (std::unordered_set<std::string>{"busy"}));
}

TEST(Usage, DailyWeeklyAndTrajectories) {
  std::vector<AccessLog> logs;
  // Day 0: u1 twice (one session plus a continuation) and u2 once.
  logs.push_back({"u1", t0() + 1h, 30, std::nullopt, {}});
  logs.push_back({"u1", t0() + 1h, 30, std::string("30"), {}});
  logs.push_back({"u2", t0() + 2h, 30, std::nullopt, {}});
  // Day 8: u1 again.
  logs.push_back({"u1", t0() + std::chrono::days(8), 30, std::nullopt, {}});
  // Day 20 closes the observed range.
  logs.push_back({"u3", t0() + std::chrono::days(20), 30, std::nullopt, {}});
  UsageOptions options;
  options.groups = 1;
  options.weeks = 3;
  const auto u = usage_summary(logs, options);
  EXPECT_TRUE(u.potential_overestimate);
  EXPECT_EQ(u.total_sessions, 4u);
  ASSERT_EQ(u.daily.size(), 3u);
  EXPECT_EQ(u.daily[0].unique_users, 2u);
  EXPECT_EQ(u.daily[0].sessions, 2u);
  ASSERT_EQ(u.weekly.size(), 3u);
  EXPECT_EQ(u.weekly[1].sessions, 1u);
  ASSERT_EQ(u.trajectories.size(), 1u);
  const auto& points = u.trajectories[0].points;
  // Observation ends at day 21: weeks 0 and 1 are complete for u1 and u2,
  // week 2 is not; u3's first week is not complete either.
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0].n_users, 2u);
  EXPECT_DOUBLE_EQ(points[0].mean_sessions, 1.0);
  EXPECT_DOUBLE_EQ(points[1].mean_sessions, 0.5);
}

TEST(Dataset, OptOutHidesLaterLogs) {
  Dataset d;
  d.users.push_back({"u", t0(), 3, 0, true, t0() + 1h});
  d.access_logs = {{"u", t0(), 30, std::nullopt, {}}, {"u", t0() + 1h, 30, std::nullopt, {}},
                   {"v", t0() + 2h, 30, std::nullopt, {}}};
  apply_opt_out(d);
  ASSERT_EQ(d.access_logs.size(), 2u);
  EXPECT_EQ(d.access_logs[0].requested_at, t0());
  EXPECT_EQ(d.access_logs[1].user_id, "v");
}

TEST(Dataset, LoadsExportsFromDisk) {
  auto s = store::make_memory_store();
  s->put_post(testing::paper_post("p1", "a", t0()));
  s->put_user({"u", t0(), 1, 0, false, std::nullopt});
  s->append_access_log({"u", t0(), 30, std::nullopt, {"p1"}});
  const auto dir = std::filesystem::temp_directory_path() / "paperfeed_dataset_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (auto t : {store::Table::posts, store::Table::users, store::Table::access_logs}) {
    std::ofstream out(dir / (std::string(store::to_string(t)) + ".jsonl"));
    s->export_table(t, out);
  }
  const auto d = load_exports(dir);
  EXPECT_EQ(d.posts.size(), 1u);
  EXPECT_EQ(d.users.size(), 1u);
  EXPECT_EQ(d.access_logs.size(), 1u);
  EXPECT_TRUE(d.interactions.empty());
  const auto live = snapshot(*s);
  EXPECT_EQ(live.posts, d.posts);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace paperfeed::analytics
