// Classifies posts from a JSON-lines file and prints one verdict per line.
//
// Input lines are either firehose events (post_create records are used,
// other kinds skipped) or bare records: {"uri", "text", "links"}.

#include <glog/logging.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "paperfeed/classify/classifier.hpp"
#include "paperfeed/common/jsonl.hpp"
#include "paperfeed/ingest/event.hpp"

using namespace paperfeed;

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;

  CLI::App app{"Classify posts as paper / non-paper"};
  std::string input;
  std::string domains;
  std::string keywords;
  std::size_t min_keywords = 3;
  bool papers_only = false;
  app.add_option("--input", input, "JSON-lines posts or events")->required()->check(CLI::ExistingFile);
  app.add_option("--domains", domains, "domain allowlist file")->check(CLI::ExistingFile);
  app.add_option("--keywords", keywords, "keyword list file")->check(CLI::ExistingFile);
  app.add_option("--min-keywords", min_keywords, "distinct keywords needed without a domain link");
  app.add_flag("--papers-only", papers_only, "print only posts classified as papers");
  CLI11_PARSE(app, argc, argv);

  try {
    auto config = classify::ClassifierConfig::defaults();
    if (!domains.empty()) config.domains = classify::read_list_file(domains);
    if (!keywords.empty()) config.keywords = classify::read_list_file(keywords);
    config.min_keywords = min_keywords;
    const classify::PaperClassifier classifier(config);

    std::size_t total = 0;
    std::size_t papers = 0;
    for_each_jsonl(std::filesystem::path(input), [&](const nlohmann::json& j) {
      std::string uri;
      std::string text;
      std::vector<std::string> links;
      if (j.contains("kind")) {
        const auto event = ingest::event_from_json(j);
        if (event.kind != ingest::EventKind::post_create) return;
        uri = event.record->uri;
        text = event.record->text;
        links = event.record->links;
      } else {
        uri = j.value("uri", "");
        text = j.value("text", "");
        links = ingest::collect_links(text, j.value("links", std::vector<std::string>{}));
      }
      const auto result = classifier.classify(text, links);
      ++total;
      papers += result.is_paper ? 1 : 0;
      if (papers_only && !result.is_paper) return;
      std::cout << nlohmann::json{{"uri", uri},
                                  {"is_paper", result.is_paper},
                                  {"matched_domains", result.matched_domains},
                                  {"matched_keywords", result.matched_keywords},
                                  {"arxiv_ids", result.arxiv_ids}}
                       .dump()
                << '\n';
    });
    LOG(INFO) << papers << " of " << total << " posts classified as papers";
  } catch (const std::exception& e) {
    std::cerr << "classify: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
