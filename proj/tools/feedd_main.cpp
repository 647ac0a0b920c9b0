// Feed generator daemon: HTTP endpoints, the recommendation scheduler,
// keep-warm pings and, optionally, ingestion from an event log.
//
//   feedd --config config/feedd.json --db store.log --follows follows.json
//         [--events events.jsonl] [--port 3000]
//
// Follows come from a JSON table {"<user>": ["<account>", ...]}; a
// network-backed directory client plugs in through rec::FollowsClient.

#include <glog/logging.h>

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "paperfeed/classify/classifier.hpp"
#include "paperfeed/common/errors.hpp"
#include "paperfeed/feed/http_server.hpp"
#include "paperfeed/feed/service.hpp"
#include "paperfeed/harness/follows_stub.hpp"
#include "paperfeed/ingest/event_source.hpp"
#include "paperfeed/ingest/ingestor.hpp"
#include "paperfeed/rec/engine.hpp"
#include "paperfeed/store/store.hpp"

using namespace paperfeed;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;

  CLI::App app{"Paper feed generator"};
  std::string config_path;
  std::string db;
  std::string follows_path;
  std::string events_path;
  std::string checkpoint;
  int port = -1;
  app.add_option("--config", config_path, "feed config JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--db", db, "store log file")->required();
  app.add_option("--follows", follows_path, "follows table JSON")->check(CLI::ExistingFile);
  app.add_option("--events", events_path, "ingest this event log in the background")->check(CLI::ExistingFile);
  app.add_option("--checkpoint", checkpoint, "ingest resume checkpoint file");
  app.add_option("--port", port, "override the configured port");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto config_json = read_json(config_path);
    auto feed_config = feed::FeedConfig::from_json(config_json);
    if (port >= 0) feed_config.port = port;

    rec::EngineConfig engine_config;
    if (const auto it = config_json.find("engine"); it != config_json.end()) {
      engine_config.period = std::chrono::minutes(it->value("period_minutes", 20));
      engine_config.batch_size = it->value("batch_size", engine_config.batch_size);
      engine_config.per_author_cap = it->value("per_author_cap", engine_config.per_author_cap);
      engine_config.list_cap = it->value("list_cap", engine_config.list_cap);
      engine_config.counterfactual_cap = it->value("counterfactual_cap", engine_config.counterfactual_cap);
      engine_config.worker_threads = it->value("worker_threads", engine_config.worker_threads);
      if (it->value("include_repost_algorithm", true)) {
        engine_config.algorithms.push_back(rec::Algorithm::with_reposts_and_quotes());
      }
    }
    engine_config.served_algorithm = feed_config.served_algorithm;

    std::map<std::string, std::vector<std::string>> follows_table;
    if (!follows_path.empty()) {
      follows_table = read_json(follows_path).get<std::map<std::string, std::vector<std::string>>>();
    }

    SystemClock clock;
    const auto store = store::open_file_store(db);
    harness::StubFollowsClient follows(std::move(follows_table));
    rec::RecEngine engine(engine_config, *store, follows, clock);
    feed::FeedService service(feed_config, *store, &engine, clock);

    std::unique_ptr<ingest::Ingestor> ingestor;
    std::unique_ptr<ingest::JsonlFileSource> source;
    std::jthread ingest_thread;
    const classify::PaperClassifier classifier(classify::ClassifierConfig::defaults());
    if (!events_path.empty()) {
      ingest::IngestConfig ingest_config;
      if (!checkpoint.empty()) ingest_config.resume_checkpoint_path = checkpoint;
      ingestor = std::make_unique<ingest::Ingestor>(ingest_config, classifier, *store);
      source = std::make_unique<ingest::JsonlFileSource>(events_path);
      ingest_thread = std::jthread([&](std::stop_token stop) { ingestor->run(*source, stop); });
    }

    engine.start_scheduler();
    service.start_keep_warm();

    feed::FeedHttpServer server(service);
    const int bound = server.bind(feed_config.bind_address, feed_config.port);
    if (bound < 0) throw Error("cannot bind " + feed_config.bind_address + ":" + std::to_string(feed_config.port));
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::jthread http([&] { server.serve(); });
    LOG(INFO) << "serving " << feed_config.service_did() << " on port " << bound;

    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
    LOG(INFO) << "shutting down";
    server.stop();
    if (ingest_thread.joinable()) ingest_thread.request_stop();
    engine.stop_scheduler();
    service.stop_keep_warm();
  } catch (const std::exception& e) {
    std::cerr << "feedd: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
