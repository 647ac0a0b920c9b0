#pragma once

#include <memory>
#include <string>

#include "paperfeed/feed/auth.hpp"
#include "paperfeed/feed/service.hpp"

namespace paperfeed::feed {

/// HTTP front end for FeedService:
///   GET /xrpc/app.bsky.feed.getFeedSkeleton?feed=&limit=&cursor=
///   GET /xrpc/app.bsky.feed.describeFeedGenerator
///   GET /.well-known/did.json
class FeedHttpServer {
 public:
  explicit FeedHttpServer(FeedService& service, TokenValidator validator = {});
  ~FeedHttpServer();

  FeedHttpServer(const FeedHttpServer&) = delete;
  FeedHttpServer& operator=(const FeedHttpServer&) = delete;

  /// Binds and serves until stop(). Port 0 picks a free port. Returns false
  /// when the address cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds without serving yet; returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves on a socket bound by bind().
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace paperfeed::feed
