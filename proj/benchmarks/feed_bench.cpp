#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "paperfeed/common/clock.hpp"
#include "paperfeed/feed/pagination.hpp"
#include "paperfeed/feed/service.hpp"
#include "paperfeed/rec/assembly.hpp"
#include "paperfeed/store/store.hpp"

namespace {

using namespace paperfeed;

std::vector<std::string> uris(std::size_t n, const std::string& prefix) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void BM_Paginate(benchmark::State& state) {
  const auto items = uris(150, "at://x/app.bsky.feed.post/");
  const int limit = static_cast<int>(state.range(0));
  for (auto _ : state) {
    std::size_t cursor = 0;
    while (true) {
      auto page = feed::paginate(items, cursor, limit);
      benchmark::DoNotOptimize(page);
      if (!page.next_cursor) break;
      cursor += static_cast<std::size_t>(limit);
    }
  }
}
BENCHMARK(BM_Paginate)->Arg(1)->Arg(30)->Arg(100);

void BM_AssembleLowContent(benchmark::State& state) {
  const rec::SystemPosts sys{"s/refresh", "s/consent", "s/onboarding", "s/follow-more"};
  const auto body = uris(5, "b/");
  const auto fallback = uris(150, "d/");
  for (auto _ : state) benchmark::DoNotOptimize(rec::assemble_served_list({true, true}, body, fallback, sys));
}
BENCHMARK(BM_AssembleLowContent);

// Cached request for an existing user, 1000 users in the store.
void BM_GetFeedSkeleton(benchmark::State& state) {
  auto store = store::make_memory_store();
  ManualClock clock(from_micros(1'740'787'200'000'000));
  for (int u = 0; u < 1000; ++u) {
    const std::string user = "did:plc:u" + std::to_string(u);
    store->put_user({user, clock.now(), 20, 5, false, std::nullopt});
    store::RecommendationList recs{user, "reverse_chronological", {}, clock.now()};
    for (const auto& uri : uris(150, "at://" + user + "/p/")) recs.items.push_back({uri, clock.now()});
    store->put_recs(recs);
  }
  feed::FeedConfig config;
  config.system_posts = {"s/refresh", "s/consent", "s/onboarding", "s/follow-more"};
  feed::FeedService svc(config, *store, nullptr, clock);
  const std::optional<std::string> cursor =
      state.range(0) == 0 ? std::nullopt : std::optional<std::string>(std::to_string(state.range(0)));
  int u = 0;
  for (auto _ : state) {
    const std::string user = "did:plc:u" + std::to_string(u++ % 1000);
    benchmark::DoNotOptimize(svc.get_feed_skeleton({"", user}, 30, cursor));
  }
  svc.drain();
}
BENCHMARK(BM_GetFeedSkeleton)->Arg(0)->Arg(60);

}  // namespace
