#include <map>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "paperfeed/common/random.hpp"
#include "paperfeed/rec/ranking.hpp"
#include "paperfeed/store/store.hpp"

namespace {

using namespace paperfeed;

// 200 authors, 50 posts each, a repost for every tenth post.
struct Corpus {
  std::unique_ptr<store::Store> store = store::make_memory_store();
  std::vector<std::string> authors;

  Corpus() {
    Rng rng(42);
    const Timestamp start = from_micros(1'740'787'200'000'000);
    for (int a = 0; a < 200; ++a) authors.push_back("did:plc:a" + std::to_string(a));
    for (int i = 0; i < 10'000; ++i) {
      store::StoredPost p;
      p.author_id = authors[i % authors.size()];
      p.uri = "at://" + p.author_id + "/app.bsky.feed.post/" + std::to_string(i);
      p.text = "new paper";
      p.arxiv_ids = {"2401.00001"};
      p.created_at = start + std::chrono::minutes(rng.below(30 * 24 * 60));
      p.ingested_at = p.created_at;
      if (rng.bernoulli(0.1)) p.quote_of = "at://elsewhere/app.bsky.feed.post/1";
      store->put_post(p);
      if (i % 10 == 0) {
        store->put_interaction({authors[rng.below(authors.size())], p.uri, store::InteractionKind::repost,
                                p.created_at + std::chrono::hours(1)});
      }
    }
  }
};

Corpus& corpus() {
  static Corpus c;
  return c;
}

void BM_RankFollowing(benchmark::State& state, rec::Algorithm algorithm) {
  auto& c = corpus();
  const std::vector<std::string> follows(c.authors.begin(), c.authors.begin() + state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rec::rank_following(*c.store, follows, algorithm, {}));
  state.counters["follows"] = static_cast<double>(state.range(0));
}
BENCHMARK_CAPTURE(BM_RankFollowing, default, rec::Algorithm::reverse_chronological())->Arg(10)->Arg(50)->Arg(200);
BENCHMARK_CAPTURE(BM_RankFollowing, reposts_quotes, rec::Algorithm::with_reposts_and_quotes())
    ->Arg(10)
    ->Arg(50)
    ->Arg(200);

void BM_MergeNewest(benchmark::State& state) {
  auto& c = corpus();
  std::vector<store::RecommendationList> lists;
  for (int u = 0; u < state.range(0); ++u) {
    const std::vector<std::string> follows = {c.authors[u % 200], c.authors[(u * 7 + 3) % 200],
                                              c.authors[(u * 13 + 5) % 200]};
    lists.push_back({"u" + std::to_string(u), "reverse_chronological",
                     rec::rank_following(*c.store, follows, rec::Algorithm::reverse_chronological(), {}), {}});
  }
  for (auto _ : state) benchmark::DoNotOptimize(rec::merge_newest(lists, store::kMaxRecommendations));
}
BENCHMARK(BM_MergeNewest)->Arg(20);

}  // namespace
