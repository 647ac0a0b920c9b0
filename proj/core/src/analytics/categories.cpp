#include "paperfeed/analytics/categories.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "paperfeed/common/errors.hpp"

namespace paperfeed::analytics {

namespace {

using Weights = std::vector<std::pair<std::size_t, double>>;

// Units of one resampling cluster: summed category weights and unit count.
struct Cluster {
  std::vector<double> weight;
  double units = 0.0;
};

class CategoryIndex {
 public:
  std::size_t id(const std::string& name) {
    const auto [it, inserted] = ids_.try_emplace(name, names_.size());
    if (inserted) names_.push_back(name);
    return it->second;
  }
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> names_;
};

std::vector<double> shares(std::span<const Cluster> clusters, std::span<const std::size_t> picks, std::size_t n) {
  std::vector<double> sum(n, 0.0);
  double units = 0.0;
  for (const auto i : picks) {
    const auto& c = clusters[i];
    for (std::size_t k = 0; k < c.weight.size(); ++k) sum[k] += c.weight[k];
    units += c.units;
  }
  if (units > 0.0) {
    for (auto& v : sum) v /= units;
  }
  return sum;
}

Distribution distribution(std::span<const Cluster> clusters, const CategoryIndex& index, std::size_t samples,
                          std::uint64_t seed) {
  const std::size_t n = index.size();
  std::vector<std::size_t> all(clusters.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto point = shares(clusters, all, n);

  std::vector<std::vector<double>> replicates(n);
  Rng rng(seed);
  for (std::size_t b = 0; b < samples; ++b) {
    const auto s = shares(clusters, resample_indices(clusters.size(), rng), n);
    for (std::size_t k = 0; k < n; ++k) replicates[k].push_back(s[k]);
  }

  Distribution out;
  for (std::size_t k = 0; k < n; ++k) {
    if (point[k] <= 0.0) continue;
    const auto ci = percentile_interval(replicates[k], point[k]);
    out[index.name(k)] = {point[k], ci.low, ci.high};
  }
  return out;
}

std::vector<std::string> top(const Distribution& d, std::size_t k) {
  std::vector<std::pair<std::string, double>> items;
  for (const auto& [name, share] : d) items.emplace_back(name, share.share);
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, items.size()); ++i) out.push_back(items[i].first);
  return out;
}

std::vector<Cluster> per_user(std::span<const UserPost> events, const std::unordered_map<std::string, Weights>& post_weights,
                              std::size_t n_categories) {
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& e : events) {
    if (post_weights.contains(e.uri)) seen[e.user_id].insert(e.uri);
  }
  std::vector<Cluster> clusters;
  for (const auto& [user, uris] : seen) {
    Cluster c{std::vector<double>(n_categories, 0.0), 0.0};
    for (const auto& uri : uris) {
      for (const auto& [k, w] : post_weights.at(uri)) c.weight[k] += w;
      c.units += 1.0;
    }
    clusters.push_back(std::move(c));
  }
  return clusters;
}

}  // namespace

CategoryDistributions category_distribution(std::span<const store::StoredPost> posts,
                                            std::span<const UserPost> shown, std::span<const UserPost> liked,
                                            const classify::ArxivCatalog& catalog,
                                            const std::unordered_set<std::string>& bot_authors,
                                            const CategoryOptions& options) {
  CategoryIndex index;
  std::unordered_map<std::string, Weights> post_weights;
  std::vector<std::string> corpus_order;
  for (const auto& post : posts) {
    if (post.arxiv_ids.empty() || bot_authors.contains(post.author_id)) continue;
    std::vector<std::string> cats;
    for (const auto& id : post.arxiv_ids) {
      const auto* listed = catalog.categories(id);
      if (!listed || listed->empty()) continue;
      const auto end = options.primary_only ? listed->begin() + 1 : listed->end();
      for (auto it = listed->begin(); it != end; ++it) {
        if (std::find(cats.begin(), cats.end(), *it) == cats.end()) cats.push_back(*it);
      }
    }
    if (cats.empty()) continue;
    Weights w;
    for (const auto& c : cats) w.emplace_back(index.id(c), 1.0 / static_cast<double>(cats.size()));
    if (post_weights.emplace(post.uri, std::move(w)).second) corpus_order.push_back(post.uri);
  }
  if (corpus_order.empty()) throw ValidationError("empty population: corpus");

  const std::size_t n = index.size();
  std::vector<Cluster> corpus;
  for (const auto& uri : corpus_order) {
    Cluster c{std::vector<double>(n, 0.0), 1.0};
    for (const auto& [k, w] : post_weights.at(uri)) c.weight[k] += w;
    corpus.push_back(std::move(c));
  }
  const auto shown_clusters = per_user(shown, post_weights, n);
  if (shown_clusters.empty()) throw ValidationError("empty population: shown");
  const auto liked_clusters = per_user(liked, post_weights, n);
  if (liked_clusters.empty()) throw ValidationError("empty population: liked");

  CategoryDistributions out;
  out.corpus = distribution(corpus, index, options.bootstrap_samples, mix_seed(options.seed, 0));
  out.shown = distribution(shown_clusters, index, options.bootstrap_samples, mix_seed(options.seed, 1));
  out.liked = distribution(liked_clusters, index, options.bootstrap_samples, mix_seed(options.seed, 2));

  std::set<std::string> reported;
  for (const auto* d : {&out.corpus, &out.shown, &out.liked}) {
    for (auto& name : top(*d, options.top_k)) reported.insert(std::move(name));
  }
  out.reported.assign(reported.begin(), reported.end());
  const auto corpus_share = [&](const std::string& name) {
    const auto it = out.corpus.find(name);
    return it == out.corpus.end() ? 0.0 : it->second.share;
  };
  std::stable_sort(out.reported.begin(), out.reported.end(),
                   [&](const auto& a, const auto& b) { return corpus_share(a) > corpus_share(b); });
  return out;
}

std::vector<UserPost> exposures_from_logs(std::span<const store::AccessLog> access_logs) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& log : access_logs) {
    for (const auto& uri : log.served_uris) seen.emplace(log.user_id, uri);
  }
  std::vector<UserPost> out;
  for (const auto& [u, p] : seen) out.push_back({u, p});
  return out;
}

std::vector<UserPost> likes_from_interactions(std::span<const store::InteractionRecord> interactions) {
  std::vector<UserPost> out;
  for (const auto& r : interactions) {
    if (r.kind == store::InteractionKind::like) out.push_back({r.actor_id, r.subject_uri});
  }
  return out;
}

std::unordered_set<std::string> high_volume_authors(std::span<const store::StoredPost> posts, double posts_per_day) {
  std::unordered_set<std::string> out;
  if (posts.empty()) return out;
  const auto [lo, hi] = std::minmax_element(posts.begin(), posts.end(), [](const auto& a, const auto& b) {
    return a.created_at < b.created_at;
  });
  const double days =
      std::max(1.0, std::chrono::duration<double, std::ratio<86400>>(hi->created_at - lo->created_at).count());
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& p : posts) ++counts[p.author_id];
  for (const auto& [author, n] : counts) {
    if (static_cast<double>(n) / days > posts_per_day) out.insert(author);
  }
  return out;
}

}  // namespace paperfeed::analytics
