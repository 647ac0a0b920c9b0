#include "paperfeed/feed/http_server.hpp"

#include <glog/logging.h>
#include <httplib.h>

#include <charconv>

#include "paperfeed/common/errors.hpp"

namespace paperfeed::feed {

namespace {

constexpr const char* kJson = "application/json";

void error_response(httplib::Response& res, int status, std::string_view error, std::string_view message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", error}, {"message", message}}.dump(), kJson);
}

}  // namespace

struct FeedHttpServer::Impl {
  FeedService& service;
  TokenValidator validator;
  httplib::Server server;

  Impl(FeedService& s, TokenValidator v) : service(s), validator(std::move(v)) {
    server.Get("/xrpc/app.bsky.feed.getFeedSkeleton",
               [this](const httplib::Request& req, httplib::Response& res) { feed_skeleton(req, res); });
    server.Get("/xrpc/app.bsky.feed.describeFeedGenerator", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(service.describe_feed_generator().dump(), kJson);
    });
    server.Get("/.well-known/did.json", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(service.did_document().dump(), kJson);
    });
  }

  void feed_skeleton(const httplib::Request& req, httplib::Response& res) {
    const auto feed = req.get_param_value("feed");
    if (!service.serves_feed(feed)) {
      error_response(res, 400, "UnknownFeed", "unknown feed: " + feed);
      return;
    }
    int limit = service.config().default_limit;
    if (req.has_param("limit")) {
      const auto text = req.get_param_value("limit");
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), limit);
      if (ec != std::errc{} || ptr != text.data() + text.size()) {
        error_response(res, 400, "InvalidRequest", "limit must be an integer");
        return;
      }
    }
    std::optional<std::string> cursor;
    if (req.has_param("cursor")) cursor = req.get_param_value("cursor");

    const auto auth = resolve_auth(req.get_header_value("Authorization"), validator);
    try {
      const auto page = service.get_feed_skeleton(auth, limit, cursor);
      nlohmann::json body;
      if (page.next_cursor) body["cursor"] = *page.next_cursor;
      body["feed"] = nlohmann::json::array();
      for (const auto& uri : page.post_uris) body["feed"].push_back({{"post", uri}});
      res.set_content(body.dump(), kJson);
    } catch (const ValidationError& e) {
      error_response(res, 400, "InvalidRequest", e.what());
    } catch (const StoreUnavailable& e) {
      LOG(ERROR) << "feed request failed: " << e.what();
      error_response(res, 500, "InternalServerError", "recommendations unavailable");
    }
  }
};

FeedHttpServer::FeedHttpServer(FeedService& service, TokenValidator validator)
    : impl_(std::make_unique<Impl>(service, std::move(validator))) {}

FeedHttpServer::~FeedHttpServer() { stop(); }

bool FeedHttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int FeedHttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool FeedHttpServer::serve() { return impl_->server.listen_after_bind(); }

void FeedHttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void FeedHttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace paperfeed::feed
