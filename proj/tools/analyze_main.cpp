// Offline analyses over store exports (one <table>.jsonl per table).
//
//   analyze rank-engagement --window 30 --page-size 30 --seed 7
//   analyze adoption
//   analyze categories
//   analyze usage
//
// Each writes a CSV table to --out (stdout by default) and, with --summary,
// a JSON summary.

#include <glog/logging.h>

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "paperfeed/analytics/adoption.hpp"
#include "paperfeed/analytics/categories.hpp"
#include "paperfeed/analytics/dataset.hpp"
#include "paperfeed/analytics/engagement.hpp"
#include "paperfeed/analytics/usage.hpp"
#include "paperfeed/classify/bot.hpp"
#include "paperfeed/classify/classifier.hpp"
#include "paperfeed/common/errors.hpp"
#include "paperfeed/common/jsonl.hpp"

using namespace paperfeed;
namespace fs = std::filesystem;

namespace {

struct Output {
  std::string csv_path;
  std::string summary_path;

  template <typename Fn>
  void csv(Fn&& write) const {
    if (csv_path.empty()) {
      std::cout << std::setprecision(10);
      write(std::cout);
      return;
    }
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw Error("cannot write " + csv_path);
    out << std::setprecision(10);
    write(out);
  }

  void summary(const nlohmann::json& j) const {
    if (summary_path.empty()) return;
    std::ofstream out(summary_path, std::ios::trunc);
    if (!out) throw Error("cannot write " + summary_path);
    out << j.dump(2) << '\n';
  }
};

std::optional<double> parse_window(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "none") return std::nullopt;
  const double w = std::stod(text);
  if (w < 0) throw ValidationError("window must be >= 0 or 'inf'");
  return w;
}

std::vector<analytics::LikeEvent> read_likes(const fs::path& path) {
  std::vector<analytics::LikeEvent> likes;
  for_each_jsonl(path, [&](const nlohmann::json& j) {
    likes.push_back({j.at("user_id").get<std::string>(), parse_timestamp(j.at("created_at").get<std::string>()),
                     j.at("is_paper").get<bool>()});
  });
  return likes;
}

std::unordered_set<std::string> read_ids(const fs::path& path) {
  std::unordered_set<std::string> ids;
  for (auto& id : classify::read_list_file(path)) ids.insert(std::move(id));
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;

  CLI::App app{"Behavioral analyses over store exports"};
  app.require_subcommand(1);
  std::string exports = "exports";
  Output output;
  app.add_option("--exports", exports, "directory with <table>.jsonl exports");
  app.add_option("--out", output.csv_path, "CSV output file (default stdout)");
  app.add_option("--summary", output.summary_path, "JSON summary output file");

  auto* rank = app.add_subcommand("rank-engagement", "engagement rate by highest feed position");
  std::string window = "30";
  analytics::EngagementOptions engagement;
  rank->add_option("--window", window, "seconds after access, or 'inf'")->capture_default_str();
  rank->add_option("--page-size", engagement.page_size_filter, "only accesses with this limit")->capture_default_str();
  rank->add_option("--seed", engagement.seed, "bootstrap seed")->capture_default_str();
  rank->add_option("--bootstrap", engagement.bootstrap_samples, "bootstrap resamples")->capture_default_str();

  auto* adoption = app.add_subcommand("adoption", "paper-like change around first feed use");
  std::string likes_path;
  adoption->add_option("--likes", likes_path, "all likes (default <exports>/all_likes.jsonl)");

  auto* categories = app.add_subcommand("categories", "arXiv category mix of corpus, shown and liked posts");
  std::string catalog_path;
  std::string bots_path;
  double bot_rate = classify::kDefaultBotPostsPerDay;
  analytics::CategoryOptions category_options;
  categories->add_option("--catalog", catalog_path, "id,categories CSV (default <exports>/arxiv_catalog.csv)");
  categories->add_option("--bots", bots_path, "bot author ids, one per line (default <exports>/bot_authors.txt)");
  categories->add_option("--bot-rate", bot_rate, "posts per day above which an author counts as a bot")
      ->capture_default_str();
  categories->add_flag("--primary-only", category_options.primary_only, "use only each paper's primary category");
  categories->add_option("--seed", category_options.seed, "bootstrap seed")->capture_default_str();
  categories->add_option("--bootstrap", category_options.bootstrap_samples, "bootstrap resamples")
      ->capture_default_str();

  auto* usage = app.add_subcommand("usage", "daily users and sessions, usage trajectories");
  analytics::UsageOptions usage_options;
  usage->add_option("--weeks", usage_options.weeks, "trajectory length in weeks")->capture_default_str();
  usage->add_option("--groups", usage_options.groups, "percentile groups")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto data = analytics::load_exports(exports);

    if (rank->parsed()) {
      engagement.window_seconds = parse_window(window);
      const auto rows = analytics::engagement_by_rank(data.access_logs, data.interactions, engagement);
      output.csv([&](std::ostream& out) {
        out << "kind,rank,rate,ci_low,ci_high,n_pairs,n_engaged\n";
        for (const auto& r : rows) {
          out << store::to_string(r.kind) << ',' << r.rank << ',' << r.rate << ',' << r.ci_low << ',' << r.ci_high
              << ',' << r.n_pairs << ',' << r.n_engaged << '\n';
        }
      });
      const auto ratio = analytics::rank_rate_ratio(data.access_logs, data.interactions, engagement,
                                                    store::InteractionKind::like, 1, 5);
      std::uint64_t pairs = 0;
      for (const auto& r : rows) pairs += r.kind == store::InteractionKind::like ? r.n_pairs : 0;
      output.summary({{"window_seconds", engagement.window_seconds ? nlohmann::json(*engagement.window_seconds)
                                                                   : nlohmann::json("inf")},
                      {"page_size", engagement.page_size_filter},
                      {"seed", engagement.seed},
                      {"bootstrap_samples", engagement.bootstrap_samples},
                      {"exposure_pairs", pairs},
                      {"like_ratio_rank1_rank5",
                       {{"ratio", std::isnan(ratio.ratio) ? nlohmann::json() : nlohmann::json(ratio.ratio)},
                        {"ci_low", std::isnan(ratio.ci_low) ? nlohmann::json() : nlohmann::json(ratio.ci_low)},
                        {"ci_high", std::isnan(ratio.ci_high) ? nlohmann::json() : nlohmann::json(ratio.ci_high)}}}});
    } else if (adoption->parsed()) {
      const auto likes = read_likes(likes_path.empty() ? fs::path(exports) / "all_likes.jsonl" : fs::path(likes_path));
      const auto activity = analytics::build_activity(data.access_logs, likes);
      const auto effect = analytics::adoption_effect(activity);
      output.csv([&](std::ostream& out) {
        out << "statistic,n_users,mean,se,ci_low,ci_high\n";
        out << "count_diff," << effect.n_users << ',' << effect.mean_count_diff << ',' << effect.se_count_diff << ','
            << effect.ci_count.low << ',' << effect.ci_count.high << '\n';
        out << "prop_diff," << effect.n_prop_users << ',' << effect.mean_prop_diff << ',' << effect.se_prop_diff
            << ',' << effect.ci_prop.low << ',' << effect.ci_prop.high << '\n';
      });
      output.summary({{"users_considered", activity.size()},
                      {"eligible_users", effect.n_users},
                      {"count_diff", {{"mean", effect.mean_count_diff}, {"se", effect.se_count_diff}}},
                      {"prop_diff",
                       {{"n_users", effect.n_prop_users},
                        {"mean", effect.mean_prop_diff},
                        {"se", effect.se_prop_diff}}}});
    } else if (categories->parsed()) {
      const auto catalog = classify::ArxivCatalog::load_csv(
          catalog_path.empty() ? fs::path(exports) / "arxiv_catalog.csv" : fs::path(catalog_path));
      auto bots = analytics::high_volume_authors(data.posts, bot_rate);
      const fs::path bots_file = bots_path.empty() ? fs::path(exports) / "bot_authors.txt" : fs::path(bots_path);
      if (fs::exists(bots_file)) bots.merge(read_ids(bots_file));
      const auto shown = analytics::exposures_from_logs(data.access_logs);
      const auto liked = analytics::likes_from_interactions(data.interactions);
      const auto dist =
          analytics::category_distribution(data.posts, shown, liked, catalog, bots, category_options);
      output.csv([&](std::ostream& out) {
        out << "population,category,share,ci_low,ci_high\n";
        const std::pair<const char*, const analytics::Distribution*> pops[] = {
            {"corpus", &dist.corpus}, {"shown", &dist.shown}, {"liked", &dist.liked}};
        for (const auto& [name, d] : pops) {
          for (const auto& category : dist.reported) {
            const auto it = d->find(category);
            const analytics::CategoryShare s = it == d->end() ? analytics::CategoryShare{} : it->second;
            out << name << ',' << category << ',' << s.share << ',' << s.ci_low << ',' << s.ci_high << '\n';
          }
        }
      });
      output.summary({{"reported_categories", dist.reported},
                      {"bot_authors_excluded", bots.size()},
                      {"primary_only", category_options.primary_only}});
    } else if (usage->parsed()) {
      const auto summary = analytics::usage_summary(data.access_logs, usage_options);
      output.csv([&](std::ostream& out) {
        out << "day,unique_users,sessions\n";
        for (const auto& d : summary.daily) {
          out << format_timestamp(d.day).substr(0, 10) << ',' << d.unique_users << ',' << d.sessions << '\n';
        }
      });
      nlohmann::json weekly = nlohmann::json::array();
      for (const auto& w : summary.weekly) {
        weekly.push_back({{"week_start", format_timestamp(w.week_start)},
                          {"unique_users", w.unique_users},
                          {"sessions", w.sessions}});
      }
      nlohmann::json trajectories = nlohmann::json::array();
      for (const auto& t : summary.trajectories) {
        nlohmann::json points = nlohmann::json::array();
        for (const auto& p : t.points) {
          points.push_back({{"week", p.week},
                            {"n_users", p.n_users},
                            {"mean_sessions", p.mean_sessions},
                            {"ci_low", p.ci.low},
                            {"ci_high", p.ci.high}});
        }
        trajectories.push_back(
            {{"percentile_low", t.percentile_low}, {"percentile_high", t.percentile_high}, {"points", points}});
      }
      output.summary({{"total_sessions", summary.total_sessions},
                      {"potential_overestimate", summary.potential_overestimate},
                      {"weekly", weekly},
                      {"trajectories", trajectories}});
    }
  } catch (const std::exception& e) {
    std::cerr << "analyze: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
