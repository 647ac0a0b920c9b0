#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "paperfeed/classify/classifier.hpp"
#include "paperfeed/common/errors.hpp"
#include "paperfeed/common/jsonl.hpp"
#include "paperfeed/ingest/event.hpp"
#include "paperfeed/ingest/event_source.hpp"
#include "paperfeed/ingest/ingestor.hpp"
#include "paperfeed/store/store.hpp"
#include "support/builders.hpp"
#include "support/flaky_kv.hpp"

namespace paperfeed::ingest {
namespace {

using namespace std::chrono_literals;
using testing::create_event;
using testing::subject_event;
using testing::t0;

const std::vector<std::string> kArxivLink = {"https://arxiv.org/abs/2401.00001"};

std::string dump(const store::Store& s) {
  std::ostringstream out;
  for (auto t : store::kAllTables) s.export_table(t, out);
  return out.str();
}

IngestConfig quick_config(std::size_t workers = 3) {
  IngestConfig c;
  c.worker_count = workers;
  c.queue_capacity = 4;
  return c;
}

const Ingestor::Sleeper kNoSleep = [](Duration) {};

// A small stream touching every event kind, including a like that refers
// to a post which is never stored.
std::vector<EventEnvelope> sample_events() {
  std::vector<EventEnvelope> events;
  std::uint64_t seq = 0;
  for (int i = 0; i < 20; ++i) {
    const auto uri = testing::post_uri("did:plc:a" + std::to_string(i % 4), i);
    events.push_back(create_event(++seq, uri, "did:plc:a" + std::to_string(i % 4), i % 5 == 0 ? "lunch" : "hi",
                                  i % 5 == 0 ? std::vector<std::string>{} : kArxivLink, t0() + std::chrono::seconds(i)));
    events.push_back(subject_event(++seq, EventKind::like, "did:plc:u1", uri, t0() + std::chrono::seconds(i) + 1s));
    if (i % 3 == 0) {
      events.push_back(subject_event(++seq, EventKind::repost, "did:plc:u2", uri, t0() + std::chrono::seconds(i) + 2s));
    }
    if (i % 7 == 0) events.push_back(subject_event(++seq, EventKind::post_delete, "did:plc:a0", uri, t0() + 1h));
  }
  EventEnvelope follow;
  follow.seq = ++seq;
  follow.kind = EventKind::follow;
  follow.actor_id = "did:plc:u1";
  follow.subject_uri = "did:plc:a1";
  follow.created_at = follow.received_at = t0();
  events.push_back(follow);
  events.push_back(subject_event(++seq, EventKind::like, "did:plc:u1", "at://gone/app.bsky.feed.post/1", t0()));
  return events;
}

TEST(Event, JsonRoundTrip) {
  auto e = create_event(7, "at://a/app.bsky.feed.post/1", "a", "see https://arxiv.org/abs/2401.00001 now", kArxivLink,
                        t0());
  e.record->quote_of = "at://b/app.bsky.feed.post/2";
  e.received_at = t0() + 2s;
  const auto line = to_json_line(e);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(parse_event_line(line), e);
}

TEST(Event, ReceivedAtDefaultsToCreatedAt) {
  const auto e = parse_event_line(
      R"({"seq":1,"kind":"like","actor_id":"u","subject_uri":"at://x/p/1","created_at":"2025-03-01T00:00:00Z"})");
  EXPECT_EQ(e.received_at, e.created_at);
}

TEST(Event, ParsingCollectsTextLinks) {
  const auto e = parse_event_line(
      R"({"seq":1,"kind":"post_create","actor_id":"a","created_at":"2025-03-01T00:00:00Z",)"
      R"("record":{"uri":"at://a/p/1","author_id":"a","text":"read https://doi.org/10.1/x and http://osf.io/y.",)"
      R"("links":["https://doi.org/10.1/x"],"created_at":"2025-03-01T00:00:00Z"}})");
  EXPECT_EQ(e.record->links, (std::vector<std::string>{"https://doi.org/10.1/x", "http://osf.io/y"}));
}

TEST(Event, ValidationNamesMissingFields) {
  EXPECT_THROW(parse_event_line(R"({"seq":1,"kind":"like","actor_id":"u","created_at":"2025-03-01T00:00:00Z"})"),
               ValidationError);
  EXPECT_THROW(parse_event_line(R"({"seq":1,"kind":"post_create","actor_id":"u","created_at":"2025-03-01T00:00:00Z"})"),
               ValidationError);
  EXPECT_THROW(parse_event_line(R"({"seq":1,"kind":"teleport","actor_id":"u","created_at":"2025-03-01T00:00:00Z"})"),
               Error);
  EXPECT_THROW(parse_event_line("{not json"), ParseError);
}

TEST(Event, CollectLinksDedupsInOrder) {
  EXPECT_EQ(collect_links("a https://x.org/1 b https://y.org/2, https://x.org/1", {"https://y.org/2"}),
            (std::vector<std::string>{"https://y.org/2", "https://x.org/1"}));
}

TEST(Ingestor, AppliesEveryKind) {
  const classify::PaperClassifier classifier;
  auto s = store::make_memory_store();
  Ingestor ingestor(quick_config(), classifier, *s, kNoSleep);
  for (auto& e : sample_events()) ingestor.submit(e);
  ingestor.drain();
  const auto stats = ingestor.stats();
  EXPECT_EQ(stats.posts_stored, 16u);
  EXPECT_EQ(stats.posts_rejected, 4u);
  EXPECT_EQ(stats.dropped_irrelevant, 1u);
  EXPECT_EQ(stats.interactions_unknown_subject, 7u);  // likes and reposts of rejected posts, the dangling like
  EXPECT_EQ(stats.deletes_applied, 2u);               // posts 7 and 14; post 0 was never stored
  EXPECT_EQ(s->count(store::Table::posts), 16u);
  EXPECT_TRUE(s->get_post(testing::post_uri("did:plc:a3", 7))->deleted);
  EXPECT_EQ(ingestor.low_watermark(), sample_events().back().seq);
}

TEST(Ingestor, RedeliveryLeavesStoreUnchanged) {
  const classify::PaperClassifier classifier;
  auto once = store::make_memory_store();
  {
    Ingestor ingestor(quick_config(1), classifier, *once, kNoSleep);
    for (auto& e : sample_events()) ingestor.submit(e);
  }
  auto twice = store::make_memory_store();
  for (int pass = 0; pass < 2; ++pass) {
    Ingestor ingestor(quick_config(4), classifier, *twice, kNoSleep);
    for (auto& e : sample_events()) ingestor.submit(e);
    ingestor.drain();
  }
  EXPECT_EQ(dump(*once), dump(*twice));
}

TEST(Ingestor, ReconnectSkipsOverlapAndResumes) {
  const classify::PaperClassifier classifier;
  auto events = sample_events();
  auto reference = store::make_memory_store();
  {
    Ingestor ingestor(quick_config(), classifier, *reference, kNoSleep);
    VectorSource source(events);
    ingestor.run(source);
  }

  auto s = store::make_memory_store();
  Ingestor ingestor(quick_config(), classifier, *s, kNoSleep);
  VectorSource source(events, {5, 20, 30}, 3);
  source.fail_reconnects(2);
  ingestor.run(source);
  const auto stats = ingestor.stats();
  EXPECT_EQ(stats.skipped_already_seen, 9u);
  EXPECT_GE(stats.reconnects, 5u);
  EXPECT_EQ(dump(*s), dump(*reference));
}

TEST(Ingestor, GivesUpAfterConfiguredReconnectFailures) {
  const classify::PaperClassifier classifier;
  auto s = store::make_memory_store();
  auto config = quick_config();
  config.max_reconnect_attempts = 2;
  Ingestor ingestor(config, classifier, *s, kNoSleep);
  VectorSource source(sample_events(), {3});
  source.fail_reconnects(100);
  EXPECT_THROW(ingestor.run(source), StreamDisconnected);
  EXPECT_EQ(ingestor.low_watermark(), 3u);
}

TEST(Ingestor, BackoffDoublesUpToCap) {
  const classify::PaperClassifier classifier;
  auto s = store::make_memory_store();
  auto config = quick_config();
  config.initial_backoff = 100ms;
  config.max_backoff = 500ms;
  std::vector<Duration> sleeps;
  Ingestor ingestor(config, classifier, *s, [&](Duration d) { sleeps.push_back(d); });
  VectorSource source(sample_events(), {3});
  source.fail_reconnects(4);
  ingestor.run(source);
  EXPECT_EQ(sleeps, (std::vector<Duration>{100ms, 200ms, 400ms, 500ms, 500ms}));
}

TEST(Ingestor, CheckpointResumesAfterCrash) {
  const auto dir = std::filesystem::temp_directory_path() / "paperfeed_ingest_ckpt";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const classify::PaperClassifier classifier;
  auto events = sample_events();
  auto config = quick_config();
  config.resume_checkpoint_path = dir / "ckpt";
  config.checkpoint_every = 5;

  auto s = store::make_memory_store();
  {
    // First process sees only the first half of the stream.
    std::vector<EventEnvelope> first(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(events.size() / 2));
    Ingestor ingestor(config, classifier, *s, kNoSleep);
    VectorSource source(first);
    ingestor.run(source);
  }
  const auto checkpoint = Ingestor::read_checkpoint(dir / "ckpt");
  EXPECT_EQ(checkpoint, events[events.size() / 2 - 1].seq);

  Ingestor resumed(config, classifier, *s, kNoSleep);
  VectorSource source(events);
  resumed.run(source);
  EXPECT_EQ(resumed.stats().skipped_already_seen, events.size() / 2);

  auto reference = store::make_memory_store();
  {
    Ingestor ingestor(quick_config(), classifier, *reference, kNoSleep);
    for (auto& e : events) ingestor.submit(e);
  }
  EXPECT_EQ(dump(*s), dump(*reference));
  std::filesystem::remove_all(dir);
}

TEST(Ingestor, RetriesThenDeadLetters) {
  const auto dir = std::filesystem::temp_directory_path() / "paperfeed_ingest_dlq";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const classify::PaperClassifier classifier;
  auto kv = std::make_unique<testing::FlakyKv>();
  auto* raw = kv.get();
  store::Store s(std::move(kv));
  auto config = quick_config(1);
  config.dead_letter_path = dir / "dead.jsonl";
  config.max_write_attempts = 3;
  Ingestor ingestor(config, classifier, s, kNoSleep);

  raw->failing_writes = 2;
  ingestor.process(create_event(1, "at://a/p/1", "a", "", kArxivLink, t0()));
  EXPECT_TRUE(s.contains_post("at://a/p/1"));

  raw->failing_writes = 3;
  ingestor.process(create_event(2, "at://a/p/2", "a", "", kArxivLink, t0()));
  EXPECT_FALSE(s.contains_post("at://a/p/2"));

  const auto stats = ingestor.stats();
  EXPECT_EQ(stats.write_retries, 4u);
  EXPECT_EQ(stats.dead_lettered, 1u);
  int rows = 0;
  for_each_jsonl(dir / "dead.jsonl", [&](const nlohmann::json& row) {
    ++rows;
    EXPECT_EQ(row.at("seq"), 2);
    EXPECT_TRUE(row.contains("error"));
  });
  EXPECT_EQ(rows, 1);
  std::filesystem::remove_all(dir);
}

TEST(JsonlFileSource, ReconnectRestartsFromTop) {
  const auto path = std::filesystem::temp_directory_path() / "paperfeed_source.jsonl";
  {
    std::ofstream out(path);
    for (const auto& e : sample_events()) out << to_json_line(e) << "\n";
  }
  JsonlFileSource source(path);
  std::uint64_t n = 0;
  while (auto e = source.next()) {
    ++n;
    if (n == 4) break;
  }
  // Files restart from the top; the reader filters what it has seen.
  source.reconnect(10);
  const auto next = source.next();
  ASSERT_TRUE(next.has_value());
  EXPECT_EQ(next->seq, 1u);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace paperfeed::ingest
