#include <atomic>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "paperfeed/common/clock.hpp"
#include "paperfeed/common/errors.hpp"
#include "paperfeed/common/random.hpp"
#include "paperfeed/feed/auth.hpp"
#include "paperfeed/feed/http_server.hpp"
#include "paperfeed/feed/pagination.hpp"
#include "paperfeed/feed/service.hpp"
#include "paperfeed/store/store.hpp"
#include "support/builders.hpp"
#include "support/flaky_kv.hpp"

namespace paperfeed::feed {
namespace {

using namespace std::chrono_literals;
using testing::t0;

std::vector<std::string> items(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("at://a/app.bsky.feed.post/" + std::to_string(i));
  return out;
}

TEST(Pagination, CursorParsing) {
  EXPECT_EQ(parse_cursor(std::nullopt), 0u);
  EXPECT_EQ(parse_cursor("30"), 30u);
  EXPECT_EQ(parse_cursor(""), 0u);
  EXPECT_EQ(parse_cursor("-5"), 0u);
  EXPECT_EQ(parse_cursor("12abc"), 0u);
  EXPECT_EQ(parse_cursor("99999999999999999999999"), 0u);
}

TEST(Pagination, PagesConcatenateToTheListForAnyLimit) {
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const auto list = items(rng.below(260));
    const int limit = 1 + static_cast<int>(rng.below(100));
    std::vector<std::string> joined;
    std::optional<std::string> cursor;
    std::size_t pages = 0;
    do {
      const auto page = paginate(list, parse_cursor(cursor), limit);
      ASSERT_LE(page.post_uris.size(), static_cast<std::size_t>(limit));
      if (page.next_cursor) {
        ASSERT_EQ(page.post_uris.size(), static_cast<std::size_t>(limit));
        ASSERT_EQ(*page.next_cursor, std::to_string(parse_cursor(cursor) + static_cast<std::size_t>(limit)));
      }
      joined.insert(joined.end(), page.post_uris.begin(), page.post_uris.end());
      cursor = page.next_cursor;
      ++pages;
    } while (cursor);
    ASSERT_EQ(joined, list);
    const std::size_t expected_pages = list.empty() ? 1 : (list.size() + static_cast<std::size_t>(limit) - 1) / static_cast<std::size_t>(limit);
    ASSERT_EQ(pages, expected_pages);
  }
}

TEST(Pagination, CursorPastEndIsEmptyTerminal) {
  const auto list = items(5);
  const auto page = paginate(list, 50, 10);
  EXPECT_TRUE(page.post_uris.empty());
  EXPECT_EQ(page.next_cursor, std::nullopt);
  EXPECT_EQ(paginate(list, 0, 5).next_cursor, std::nullopt);
}

TEST(Auth, Base64UrlRoundTrip) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    std::string raw(rng.below(40), '\0');
    for (auto& c : raw) c = static_cast<char>(rng.below(256));
    const auto encoded = base64url_encode(raw);
    EXPECT_EQ(encoded.find_first_of("+/="), std::string::npos);
    EXPECT_EQ(base64url_decode(encoded), raw);
  }
  EXPECT_EQ(base64url_encode("hello"), "aGVsbG8");
  EXPECT_EQ(base64url_decode("a$b"), std::nullopt);
}

TEST(Auth, ResolvesSubjectFromBearerToken) {
  const auto ctx = resolve_auth("Bearer " + make_unsigned_token("did:plc:alice"));
  EXPECT_EQ(ctx.user_id, "did:plc:alice");
}

TEST(Auth, FallsBackToIssuer) {
  const std::string header = base64url_encode(R"({"alg":"ES256K"})");
  const std::string payload = base64url_encode(R"({"iss":"did:plc:bob","aud":"did:web:feed"})");
  EXPECT_EQ(resolve_auth("Bearer " + header + "." + payload + ".sig").user_id, "did:plc:bob");
}

TEST(Auth, MalformedOrRejectedTokensAreLoggedOut) {
  EXPECT_EQ(resolve_auth("").user_id, std::nullopt);
  EXPECT_EQ(resolve_auth("Basic abc").user_id, std::nullopt);
  EXPECT_EQ(resolve_auth("Bearer not-a-jwt").user_id, std::nullopt);
  EXPECT_EQ(resolve_auth("Bearer a.!!!.c").user_id, std::nullopt);
  EXPECT_EQ(resolve_auth("Bearer " + make_unsigned_token(std::string(store::kDefaultFeedUser))).user_id,
            std::nullopt);
  const auto reject = [](const std::string&, const nlohmann::json&) { return false; };
  EXPECT_EQ(resolve_auth("Bearer " + make_unsigned_token("did:plc:alice"), reject).user_id, std::nullopt);
}

class RecordingSink : public rec::RegenerationSink {
 public:
  void request_regeneration(const std::string& user_id) override {
    std::lock_guard lock(mu);
    requests.push_back(user_id);
  }
  std::mutex mu;
  std::vector<std::string> requests;
};

FeedConfig test_config() {
  FeedConfig c;
  c.hostname = "feed.example.org";
  c.feed_uris = {"at://did:web:feed.example.org/app.bsky.feed.generator/papers"};
  c.system_posts = {"sys:refresh", "sys:consent", "sys:onboarding", "sys:follow"};
  return c;
}

store::RecommendationList recs_for(const std::string& user, std::size_t n) {
  store::RecommendationList r{user, std::string(rec::kReverseChronological), {}, t0()};
  for (const auto& uri : items(n)) r.items.push_back({uri, t0()});
  return r;
}

AuthContext as(const std::string& user) { return {"", user}; }

class FeedServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    store_ = store::make_memory_store();
    clock_.set(t0());
    auto feed = recs_for(std::string(store::kDefaultFeedUser), 3);
    for (auto& item : feed.items) item.uri = "default:" + item.uri;
    store_->put_recs(feed);
    service_ = std::make_unique<FeedService>(test_config(), *store_, &sink_, clock_);
  }

  ManualClock clock_;
  std::unique_ptr<store::Store> store_;
  RecordingSink sink_;
  std::unique_ptr<FeedService> service_;
};

TEST_F(FeedServiceTest, RejectsOutOfRangeLimits) {
  EXPECT_THROW(service_->get_feed_skeleton(as("u"), 0, std::nullopt), ValidationError);
  EXPECT_THROW(service_->get_feed_skeleton(as("u"), 101, std::nullopt), ValidationError);
  EXPECT_NO_THROW(service_->get_feed_skeleton({}, 100, std::nullopt));
}

TEST_F(FeedServiceTest, LoggedOutGetsDefaultFeedWithoutLogs) {
  const auto page = service_->get_feed_skeleton({}, 2, std::nullopt);
  EXPECT_EQ(page.post_uris.size(), 2u);
  EXPECT_EQ(page.next_cursor, "2");
  service_->drain();
  EXPECT_EQ(store_->count(store::Table::access_logs), 0u);
  EXPECT_TRUE(sink_.requests.empty());
}

TEST_F(FeedServiceTest, FirstVisitGetsRefreshPromptAndRegistersUser) {
  const auto page = service_->get_feed_skeleton(as("did:plc:new"), 30, std::nullopt);
  EXPECT_EQ(page.post_uris, std::vector<std::string>{"sys:refresh"});
  EXPECT_EQ(page.next_cursor, std::nullopt);
  EXPECT_EQ(sink_.requests, std::vector<std::string>{"did:plc:new"});
  service_->drain();
  const auto user = store_->get_user("did:plc:new");
  ASSERT_TRUE(user.has_value());
  EXPECT_EQ(user->access_count, 0u);
  EXPECT_EQ(user->first_access_at, t0());
  const auto logs = store_->access_logs_for("did:plc:new");
  ASSERT_EQ(logs.size(), 1u);
  EXPECT_EQ(logs[0].served_uris, page.post_uris);
}

TEST_F(FeedServiceTest, VisitsWalkThroughConsentAndOnboarding) {
  store_->put_user({"u", t0(), 0, 0, false, std::nullopt});
  store_->put_recs(recs_for("u", 40));
  for (int visit = 1; visit <= 12; ++visit) {
    const auto page = service_->get_feed_skeleton(as("u"), 30, std::nullopt);
    service_->drain();
    std::vector<std::string> expected_head;
    if (visit <= 5) expected_head.push_back("sys:consent");
    if (visit <= 10) expected_head.push_back("sys:onboarding");
    EXPECT_TRUE(std::equal(expected_head.begin(), expected_head.end(), page.post_uris.begin())) << visit;
    EXPECT_EQ(page.post_uris[expected_head.size()], items(1)[0]) << visit;
    EXPECT_EQ(store_->get_user("u")->access_count, static_cast<std::uint64_t>(visit));
  }
  EXPECT_EQ(store_->get_user("u")->consent_views, 5);
}

TEST_F(FeedServiceTest, ContinuationPagesKeepTheSessionPrefix) {
  store_->put_user({"u", t0(), 4, 4, false, std::nullopt});
  store_->put_recs(recs_for("u", 40));
  const auto first = service_->get_feed_skeleton(as("u"), 30, std::nullopt);
  service_->drain();  // counters now say consent is done
  const auto second = service_->get_feed_skeleton(as("u"), 30, first.next_cursor);
  std::vector<std::string> joined = first.post_uris;
  joined.insert(joined.end(), second.post_uris.begin(), second.post_uris.end());
  std::vector<std::string> expected = {"sys:consent", "sys:onboarding"};
  for (const auto& uri : items(40)) expected.push_back(uri);
  EXPECT_EQ(joined, expected);
  EXPECT_EQ(second.next_cursor, std::nullopt);
  service_->drain();
  EXPECT_EQ(store_->get_user("u")->access_count, 5u);  // continuation is not a visit
  EXPECT_EQ(store_->access_logs_for("u").size(), 2u);
  EXPECT_EQ(sink_.requests.size(), 1u);
}

TEST_F(FeedServiceTest, LowContentUsersGetFollowMoreAndDefaultFeed) {
  store_->put_user({"u", t0(), 50, 5, false, std::nullopt});
  store_->put_recs(recs_for("u", 2));
  const auto page = service_->get_feed_skeleton(as("u"), 30, std::nullopt);
  EXPECT_EQ(page.post_uris.size(), 6u);
  EXPECT_EQ(page.post_uris[2], "sys:follow");
  EXPECT_EQ(page.post_uris[3].rfind("default:", 0), 0u);
}

TEST_F(FeedServiceTest, KnownUserWithoutRecsStillServed) {
  store_->put_user({"u", t0(), 50, 5, false, std::nullopt});
  const auto page = service_->get_feed_skeleton(as("u"), 30, std::nullopt);
  EXPECT_EQ(page.post_uris.front(), "sys:follow");
}

TEST_F(FeedServiceTest, AccessLogRecordsExactlyThePage) {
  store_->put_user({"u", t0(), 50, 5, false, std::nullopt});
  store_->put_recs(recs_for("u", 25));
  clock_.advance(5min);
  const auto page = service_->get_feed_skeleton(as("u"), 10, std::string("10"));
  service_->drain();
  const auto logs = store_->access_logs_for("u");
  ASSERT_EQ(logs.size(), 1u);
  EXPECT_EQ(logs[0].served_uris, page.post_uris);
  EXPECT_EQ(logs[0].limit, 10);
  EXPECT_EQ(logs[0].cursor, "10");
  EXPECT_EQ(logs[0].requested_at, t0() + 5min);
}

TEST_F(FeedServiceTest, DescribeAndDidDocument) {
  const auto describe = service_->describe_feed_generator();
  EXPECT_EQ(describe["did"], "did:web:feed.example.org");
  EXPECT_EQ(describe["feeds"][0]["uri"], test_config().feed_uris[0]);
  const auto did = service_->did_document();
  EXPECT_EQ(did["id"], "did:web:feed.example.org");
  EXPECT_EQ(did["service"][0]["serviceEndpoint"], "https://feed.example.org");
  EXPECT_TRUE(service_->serves_feed(test_config().feed_uris[0]));
  EXPECT_FALSE(service_->serves_feed("at://other"));
}

TEST_F(FeedServiceTest, KeepWarmCounts) {
  service_->keep_warm();
  service_->keep_warm();
  EXPECT_EQ(service_->stats().keep_warm_pings, 2u);
}

TEST(FeedConfig, FromJson) {
  const auto c = FeedConfig::from_json(nlohmann::json::parse(R"({
    "hostname": "papers.example", "feed_uris": ["at://x/app.bsky.feed.generator/p"], "port": 8080,
    "system_posts": {"refresh_prompt": "r", "consent_thread": "c", "onboarding": "o", "follow_more": "f"}})"));
  EXPECT_EQ(c.service_did(), "did:web:papers.example");
  EXPECT_EQ(c.port, 8080);
  EXPECT_EQ(c.system_posts.follow_more, "f");
  EXPECT_THROW(FeedConfig::from_json(nlohmann::json::parse(R"({"port": "x"})")), ParseError);
}

class HttpServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto kv = std::make_unique<testing::FlakyKv>();
    kv_ = kv.get();
    store_ = std::make_unique<store::Store>(std::move(kv));
    clock_.set(t0());
    store_->put_user({"did:plc:u", t0(), 50, 5, false, std::nullopt});
    store_->put_recs(recs_for("did:plc:u", 45));
    service_ = std::make_unique<FeedService>(test_config(), *store_, nullptr, clock_);
    server_ = std::make_unique<FeedHttpServer>(*service_);
    port_ = server_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::jthread([this] { server_->serve(); });
    server_->wait_until_ready();
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
    service_->drain();
  }

  httplib::Result get(const std::string& path, bool authed = true) {
    httplib::Client client("127.0.0.1", port_);
    httplib::Headers headers;
    if (authed) headers.emplace("Authorization", "Bearer " + make_unsigned_token("did:plc:u"));
    return client.Get(path, headers);
  }

  std::string skeleton_path(const std::string& query) {
    return "/xrpc/app.bsky.feed.getFeedSkeleton?feed=" + test_config().feed_uris[0] + query;
  }

  testing::FlakyKv* kv_ = nullptr;
  ManualClock clock_;
  std::unique_ptr<store::Store> store_;
  std::unique_ptr<FeedService> service_;
  std::unique_ptr<FeedHttpServer> server_;
  int port_ = 0;
  std::jthread thread_;
};

TEST_F(HttpServerTest, ServesPagesWithCursor) {
  auto res = get(skeleton_path("&limit=30"));
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  auto body = nlohmann::json::parse(res->body);
  EXPECT_EQ(body["feed"].size(), 30u);
  EXPECT_EQ(body["feed"][0]["post"], items(1)[0]);
  EXPECT_EQ(body["cursor"], "30");

  res = get(skeleton_path("&limit=30&cursor=30"));
  body = nlohmann::json::parse(res->body);
  EXPECT_EQ(body["feed"].size(), 15u);
  EXPECT_FALSE(body.contains("cursor"));
}

TEST_F(HttpServerTest, DefaultLimitApplies) {
  const auto res = get(skeleton_path(""));
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body)["feed"].size(), 30u);
}

TEST_F(HttpServerTest, RejectsBadRequests) {
  auto res = get("/xrpc/app.bsky.feed.getFeedSkeleton?feed=at://nope&limit=10");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(nlohmann::json::parse(res->body)["error"], "UnknownFeed");
  for (const char* q : {"&limit=0", "&limit=101", "&limit=ten"}) {
    res = get(skeleton_path(q));
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400) << q;
    EXPECT_EQ(nlohmann::json::parse(res->body)["error"], "InvalidRequest") << q;
  }
}

TEST_F(HttpServerTest, StoreOutageIs500) {
  kv_->fail_reads = true;
  const auto res = get(skeleton_path("&limit=10"));
  kv_->fail_reads = false;
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 500);
}

TEST_F(HttpServerTest, DescribeAndWellKnown) {
  auto res = get("/xrpc/app.bsky.feed.describeFeedGenerator", false);
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body)["did"], "did:web:feed.example.org");
  res = get("/.well-known/did.json", false);
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body)["id"], "did:web:feed.example.org");
}

}  // namespace
}  // namespace paperfeed::feed
