#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "paperfeed/classify/arxiv.hpp"
#include "paperfeed/classify/classifier.hpp"

namespace {

using paperfeed::classify::PaperClassifier;

void BM_ClassifyKeywordsOnly(benchmark::State& state) {
  const PaperClassifier classifier;
  const std::string text =
      "Excited to share our new paper, accepted at the workshop! We show that the effect holds across "
      "three datasets. Preprint and supplementary material below, thread with the main findings.";
  for (auto _ : state) benchmark::DoNotOptimize(classifier.classify(text, {}));
}
BENCHMARK(BM_ClassifyKeywordsOnly);

void BM_ClassifyWithLinks(benchmark::State& state) {
  const PaperClassifier classifier;
  const std::vector<std::string> links = {"https://example.com/blog", "https://www.biorxiv.org/content/10.1101/x",
                                          "https://arxiv.org/abs/2401.01234v2"};
  for (auto _ : state) benchmark::DoNotOptimize(classifier.classify("see the link", links));
}
BENCHMARK(BM_ClassifyWithLinks);

void BM_ClassifyNegative(benchmark::State& state) {
  const PaperClassifier classifier;
  const std::string text(state.range(0), 'x');
  const std::vector<std::string> links = {"https://video.example/clip"};
  for (auto _ : state) benchmark::DoNotOptimize(classifier.classify(text, links));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_ClassifyNegative)->Arg(64)->Arg(300)->Arg(3000);

void BM_ExtractArxivIds(benchmark::State& state) {
  const std::vector<std::string> links = {"https://arxiv.org/pdf/2401.01234v3", "https://doi.org/10.48550/arXiv.2312.00001",
                                          "https://arxiv.org/abs/hep-th/9901001"};
  for (auto _ : state) benchmark::DoNotOptimize(paperfeed::classify::extract_arxiv_ids(links));
}
BENCHMARK(BM_ExtractArxivIds);

}  // namespace
