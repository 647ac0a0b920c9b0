#include "paperfeed/harness/replay.hpp"

#include <glog/logging.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "paperfeed/analytics/dataset.hpp"
#include "paperfeed/classify/classifier.hpp"
#include "paperfeed/common/clock.hpp"
#include "paperfeed/common/random.hpp"
#include "paperfeed/common/scheduling.hpp"
#include "paperfeed/feed/auth.hpp"
#include "paperfeed/feed/service.hpp"
#include "paperfeed/harness/follows_stub.hpp"
#include "paperfeed/ingest/ingestor.hpp"
#include "paperfeed/rec/engine.hpp"

namespace paperfeed::harness {

namespace {

constexpr std::size_t kMaxViolations = 20;
constexpr std::string_view kFeedHost = "feed.example.org";

class Checker {
 public:
  CheckResult& get(const std::string& name) {
    auto [it, inserted] = checks_.try_emplace(name);
    if (inserted) {
      it->second.name = name;
      order_.push_back(name);
    }
    return it->second;
  }
  void pass(const std::string& name) { ++get(name).checked; }
  void fail(const std::string& name, std::string trace) {
    auto& c = get(name);
    ++c.checked;
    c.passed = false;
    if (c.violations.size() < kMaxViolations) c.violations.push_back(std::move(trace));
  }
  void expect(const std::string& name, bool ok, const std::function<std::string()>& trace) {
    if (ok) {
      pass(name);
    } else {
      fail(name, trace());
    }
  }
  std::vector<CheckResult> results() const {
    std::vector<CheckResult> out;
    for (const auto& name : order_) out.push_back(checks_.at(name));
    return out;
  }

 private:
  std::map<std::string, CheckResult> checks_;
  std::vector<std::string> order_;
};

std::string join(const std::vector<std::string>& items, std::size_t max = 5) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size() && i < max; ++i) out += (i ? ", " : "") + items[i];
  if (items.size() > max) out += ", ...";
  return out + "]";
}

struct ServedPage {
  std::optional<std::string> cursor;
  std::vector<std::string> uris;
};

}  // namespace

bool ReplayReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json ReplayReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : checks) {
    list.push_back({{"name", c.name}, {"passed", c.passed}, {"checked", c.checked}, {"violations", c.violations}});
  }
  return {{"passed", passed()}, {"checks", list}, {"stats", stats}};
}

rec::SystemPosts ReplayOptions::default_system_posts() {
  const std::string base = "at://did:web:" + std::string(kFeedHost) + "/app.bsky.feed.post/";
  return {base + "refresh", base + "consent", base + "onboarding", base + "follow-more"};
}

ReplayOutcome replay(const World& world, const ReplayOptions& options) {
  const WorldSpec& spec = world.spec;
  spec.validate();
  const auto wall_start = std::chrono::steady_clock::now();

  ManualClock clock(spec.start);
  VirtualScheduler scheduler(clock);
  auto store = store::make_memory_store();
  const classify::PaperClassifier classifier(classify::ClassifierConfig::defaults());

  ingest::IngestConfig ingest_config;
  ingest_config.worker_count = std::max<std::size_t>(1, options.ingest_workers);
  ingest::Ingestor ingestor(ingest_config, classifier, *store);

  const auto latency = Duration(static_cast<std::int64_t>(spec.follows_latency_ms * 1000.0));
  StubFollowsClient follows(world.follows, {latency, spec.follows_failure_rate, mix_seed(spec.seed, 11)},
                            [](Duration d) { std::this_thread::sleep_for(d); });

  rec::EngineConfig engine_config;
  engine_config.algorithms = {rec::Algorithm::reverse_chronological(), rec::Algorithm::with_reposts_and_quotes()};
  engine_config.worker_threads = std::max<std::size_t>(1, options.engine_workers);
  engine_config.seed = mix_seed(spec.seed, 3);
  rec::RecEngine engine(engine_config, *store, follows, clock);

  feed::FeedConfig feed_config;
  feed_config.hostname = std::string(kFeedHost);
  feed_config.feed_uris = {"at://did:web:" + std::string(kFeedHost) + "/app.bsky.feed.generator/papers"};
  feed_config.default_limit = spec.page_size;
  feed_config.system_posts = options.system_posts;
  feed::FeedService feed(feed_config, *store, &engine, clock);
  const auto& sys = options.system_posts;
  const std::set<std::string> system_uris = {sys.refresh_prompt, sys.consent_thread, sys.onboarding, sys.follow_more};

  Checker checks;
  ReplayOutcome outcome;
  std::uint64_t next_seq = world.events.empty() ? 1 : world.events.back().seq + 1;
  std::map<std::string, Timestamp> deleted_at;
  std::uint64_t sessions = 0;
  std::uint64_t pages = 0;
  std::uint64_t feed_likes = 0;
  std::uint64_t cycles = 0;

  // Firehose events at their receive time.
  for (const auto& event : world.events) {
    if (event.kind == ingest::EventKind::like) {
      const auto it = world.is_paper.find(*event.subject_uri);
      outcome.all_likes.push_back({event.actor_id, event.created_at, it != world.is_paper.end() && it->second});
    }
    if (event.kind == ingest::EventKind::post_delete) deleted_at[*event.subject_uri] = event.received_at;
    scheduler.at(event.received_at, [&ingestor, event](Timestamp) { ingestor.submit(event); });
  }

  // Recommendation cycles, with the per-cycle counterfactual check.
  const Duration cycle_period = engine_config.period;
  scheduler.every(cycle_period, spec.feed_start() - cycle_period, spec.end(), [&](Timestamp now) {
    ingestor.drain();
    engine.run_cycle();
    ++cycles;
    for (const auto& user : store->user_ids()) {
      const auto record = store->get_user(user);
      if (!record || record->opted_out) continue;
      for (const auto& algorithm : engine_config.algorithms) {
        const auto recs = store->get_recs(user, algorithm.algorithm_id);
        if (!recs || recs->generated_at != now) continue;  // generation failed this cycle
        // Keys are unique per (user, algorithm, time), so presence means
        // exactly one record for this cycle.
        const auto cf = store->get_counterfactual(user, algorithm.algorithm_id, now);
        const auto expected_len = std::min<std::size_t>(engine_config.counterfactual_cap, recs->items.size());
        bool ok = cf && cf->post_uris.size() == expected_len;
        for (std::size_t i = 0; ok && i < expected_len; ++i) ok = cf->post_uris[i] == recs->items[i].uri;
        checks.expect("counterfactual_completeness", ok, [&] {
          return user + " " + algorithm.algorithm_id + " at " + format_timestamp(now) + ": " +
                 (cf ? "record of length " + std::to_string(cf->post_uris.size()) : std::string("no record")) +
                 ", expected length " + std::to_string(expected_len);
        });
      }
    }
  });

  scheduler.every(feed_config.keep_warm_period, spec.feed_start(), spec.end(), [&](Timestamp) { feed.keep_warm(); });

  // Opt-outs at the midpoint of the active period.
  Rng behavior(mix_seed(spec.seed, 21));
  std::vector<std::string> users = world.feed_users;
  std::vector<std::string> opt_outs(users);
  behavior.shuffle(std::span<std::string>(opt_outs));
  opt_outs.resize(std::min(opt_outs.size(), spec.opt_out_users));
  const Timestamp midpoint = spec.feed_start() + (spec.end() - spec.feed_start()) / 2;
  std::map<std::string, Timestamp> opted_out_at;
  for (const auto& user : opt_outs) {
    opted_out_at[user] = midpoint;
    scheduler.at(midpoint, [&store, user](Timestamp now) { store->set_opted_out(user, now); });
  }

  // Sessions: first visit uniformly in the first half of the active period,
  // then a Poisson process.
  std::map<std::string, std::vector<ServedPage>> served;
  std::map<std::string, std::set<std::string>> liked;
  std::set<std::string> visited;
  std::function<void(const std::string&, Timestamp)> session;
  session = [&](const std::string& user, Timestamp now) {
    ingestor.drain();
    ++sessions;
    const auto auth = feed::resolve_auth("Bearer " + feed::make_unsigned_token(user));
    const bool first_time = visited.insert(user).second;
    std::optional<std::string> cursor;
    while (true) {
      const auto page = feed.get_feed_skeleton(auth, spec.page_size, cursor);
      feed.drain();
      engine.wait_idle();
      ++pages;
      served[user].push_back({cursor, page.post_uris});
      if (first_time) {
        checks.expect("first_visit_refresh_prompt",
                      page.post_uris == std::vector<std::string>{sys.refresh_prompt} && !page.next_cursor,
                      [&] { return user + " first page " + join(page.post_uris); });
        // The user refreshes a few seconds later.
        scheduler.at(now + std::chrono::seconds(5), [&, user](Timestamp t) { session(user, t); });
        return;
      }
      const auto offset = feed::parse_cursor(cursor);
      for (std::size_t i = 0; i < page.post_uris.size(); ++i) {
        const auto& uri = page.post_uris[i];
        if (system_uris.contains(uri) || liked[user].contains(uri)) continue;
        const int rank = static_cast<int>(offset + i + 1);
        if (!behavior.bernoulli(spec.like_probability(rank))) continue;
        liked[user].insert(uri);
        const Timestamp at =
            now + Duration(static_cast<std::int64_t>(behavior.uniform() * spec.like_delay_max_seconds * 1e6));
        ingest::EventEnvelope like;
        like.seq = next_seq++;
        like.kind = ingest::EventKind::like;
        like.actor_id = user;
        like.subject_uri = uri;
        like.created_at = at;
        like.received_at = at;
        const auto it = world.is_paper.find(uri);
        outcome.all_likes.push_back({user, at, it != world.is_paper.end() && it->second});
        ++feed_likes;
        scheduler.at(at, [&ingestor, like](Timestamp) { ingestor.submit(like); });
      }
      if (!page.next_cursor || !behavior.bernoulli(spec.next_page_probability)) return;
      cursor = page.next_cursor;
    }
  };
  const double active_days = static_cast<double>(spec.duration_days);
  for (const auto& user : users) {
    const Duration first_offset(static_cast<std::int64_t>(behavior.uniform() * active_days / 2.0 * 86'400e6));
    Timestamp t = spec.feed_start() + first_offset;
    while (t < spec.end()) {
      scheduler.at(t, [&, user](Timestamp now) { session(user, now); });
      if (spec.sessions_per_day <= 0.0) break;
      t += Duration(static_cast<std::int64_t>(behavior.exponential(spec.sessions_per_day) * 86'400e6));
    }
  }

  scheduler.run_until(spec.end());
  ingestor.drain();
  engine.wait_idle();
  feed.drain();

  // End-of-run invariants.
  const auto default_id = std::string(rec::kReverseChronological);
  for (const auto& user : store->user_ids()) {
    for (const auto& algorithm : engine_config.algorithms) {
      const auto recs = store->get_recs(user, algorithm.algorithm_id);
      if (!recs) continue;
      const auto& items = recs->items;
      checks.expect("list_cap", items.size() <= store::kMaxRecommendations,
                    [&] { return user + " has " + std::to_string(items.size()) + " items"; });
      for (std::size_t i = 1; i < items.size(); ++i) {
        checks.expect("reverse_chronological", rec::ranks_before(items[i - 1], items[i]), [&] {
          return user + " " + algorithm.algorithm_id + " inversion at " + std::to_string(i) + ": " + items[i - 1].uri +
                 " before " + items[i].uri;
        });
      }
      if (algorithm.algorithm_id == default_id) {
        std::map<std::string, int> per_author;
        for (const auto& item : items) {
          if (const auto post = store->get_post(item.uri)) ++per_author[post->author_id];
        }
        for (const auto& [author, count] : per_author) {
          checks.expect("per_author_cap", count <= 10,
                        [&] { return user + " has " + std::to_string(count) + " posts by " + author; });
        }
      }
      for (const auto& item : items) {
        const auto it = deleted_at.find(item.uri);
        checks.expect("deleted_posts_excluded", it == deleted_at.end() || it->second > recs->generated_at, [&] {
          return user + " list generated " + format_timestamp(recs->generated_at) + " holds " + item.uri +
                 " deleted " + format_timestamp(it->second);
        });
      }
    }
  }

  for (const auto& [uri, paper] : world.is_paper) {
    checks.expect("classifier_agreement", store->contains_post(uri) == paper,
                  [&] { return uri + (paper ? " planted as paper but not stored" : " stored but planted as non-paper"); });
  }

  for (const auto& [user, at] : opted_out_at) {
    const auto cfs = store->counterfactuals_for(user);
    checks.expect("opt_out_no_counterfactuals", cfs.empty(),
                  [&] { return user + " has " + std::to_string(cfs.size()) + " counterfactual records"; });
  }
  const auto data = analytics::snapshot(*store);
  for (const auto& log : data.access_logs) {
    const auto it = opted_out_at.find(log.user_id);
    checks.expect("opt_out_logs_hidden", it == opted_out_at.end() || log.requested_at < it->second,
                  [&] { return log.user_id + " log at " + format_timestamp(log.requested_at) + " after opt-out"; });
  }

  for (const auto& [user, pages_served] : served) {
    const auto logs = store->access_logs_for(user);
    checks.expect("one_access_log_per_page", logs.size() == pages_served.size(), [&] {
      return user + " served " + std::to_string(pages_served.size()) + " pages but has " + std::to_string(logs.size()) +
             " access logs";
    });
    for (std::size_t i = 0; i < std::min(logs.size(), pages_served.size()); ++i) {
      checks.expect("access_log_matches_page",
                    logs[i].served_uris == pages_served[i].uris && logs[i].cursor == pages_served[i].cursor,
                    [&] { return user + " log " + std::to_string(i) + " " + join(logs[i].served_uris); });
    }
    // Visits are session-start pages after the first-time prompt.
    int visit = 0;
    for (std::size_t i = 1; i < pages_served.size(); ++i) {
      if (pages_served[i].cursor) continue;
      ++visit;
      const auto& uris = pages_served[i].uris;
      const bool consent = std::find(uris.begin(), uris.end(), sys.consent_thread) != uris.end();
      const bool onboarding = std::find(uris.begin(), uris.end(), sys.onboarding) != uris.end();
      checks.expect("consent_first_five_visits", consent == (visit <= store::kConsentVisits),
                    [&] { return user + " visit " + std::to_string(visit) + " consent=" + (consent ? "yes" : "no"); });
      checks.expect("onboarding_first_ten_visits", onboarding == (visit <= static_cast<int>(rec::kOnboardingVisits)),
                    [&] {
                      return user + " visit " + std::to_string(visit) + " onboarding=" + (onboarding ? "yes" : "no");
                    });
    }
  }

  checks.expect("serving_path_cache_only", follows.serving_path_calls() == 0, [&] {
    return std::to_string(follows.serving_path_calls()) + " follows calls made while serving";
  });

  const auto ingest_stats = ingestor.stats();
  const auto engine_stats = engine.stats();
  const auto feed_stats = feed.stats();
  outcome.report.checks = checks.results();
  outcome.report.stats = {
      {"events", world.events.size()},
      {"posts_stored", store->count(store::Table::posts)},
      {"interactions_stored", store->count(store::Table::interactions)},
      {"users", store->count(store::Table::users)},
      {"access_logs", store->count(store::Table::access_logs)},
      {"counterfactuals", store->count(store::Table::counterfactuals)},
      {"sessions", sessions},
      {"pages", pages},
      {"feed_likes", feed_likes},
      {"cycles", cycles},
      {"generations", engine_stats.generations},
      {"generation_failures", engine_stats.failures},
      {"keep_warm_pings", feed_stats.keep_warm_pings},
      {"follows_calls", follows.calls()},
      {"follows_serving_path_calls", follows.serving_path_calls()},
      {"interactions_unknown_subject", ingest_stats.interactions_unknown_subject},
      {"wall_seconds",
       std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count()},
  };

  if (options.export_dir) {
    std::filesystem::create_directories(*options.export_dir);
    for (const auto table : store::kAllTables) {
      std::ofstream out(*options.export_dir / (std::string(store::to_string(table)) + ".jsonl"), std::ios::trunc);
      store->export_table(table, out);
    }
    std::ofstream likes(*options.export_dir / "all_likes.jsonl", std::ios::trunc);
    for (const auto& like : outcome.all_likes) {
      likes << nlohmann::json{{"user_id", like.user_id}, {"created_at", format_timestamp(like.at)},
                              {"is_paper", like.is_paper}}
                   .dump()
            << '\n';
    }
    std::ofstream catalog(*options.export_dir / "arxiv_catalog.csv", std::ios::trunc);
    world.catalog.write_csv(catalog);
    std::ofstream bots(*options.export_dir / "bot_authors.txt", std::ios::trunc);
    for (const auto& a : world.accounts) {
      if (a.bot) bots << a.did << '\n';
    }
  }

  outcome.store = std::move(store);
  return outcome;
}

}  // namespace paperfeed::harness
