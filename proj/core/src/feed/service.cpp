#include "paperfeed/feed/service.hpp"

#include <glog/logging.h>

#include <algorithm>

#include "paperfeed/common/errors.hpp"

namespace paperfeed::feed {

namespace {

thread_local bool t_serving = false;

struct ServingScope {
  ServingScope() { t_serving = true; }
  ~ServingScope() { t_serving = false; }
};

}  // namespace

bool on_serving_path() { return t_serving; }

FeedConfig FeedConfig::from_json(const nlohmann::json& j) {
  try {
    FeedConfig c;
    c.hostname = j.value("hostname", c.hostname);
    c.feed_uris = j.value("feed_uris", c.feed_uris);
    c.bind_address = j.value("bind_address", c.bind_address);
    c.port = j.value("port", c.port);
    c.default_limit = j.value("default_limit", c.default_limit);
    c.served_algorithm = j.value("served_algorithm", c.served_algorithm);
    c.keep_warm_period = std::chrono::minutes(j.value("keep_warm_minutes", 4));
    if (const auto it = j.find("system_posts"); it != j.end()) {
      c.system_posts.refresh_prompt = it->value("refresh_prompt", "");
      c.system_posts.consent_thread = it->value("consent_thread", "");
      c.system_posts.onboarding = it->value("onboarding", "");
      c.system_posts.follow_more = it->value("follow_more", "");
    }
    if (c.default_limit < kMinLimit || c.default_limit > kMaxLimit) {
      throw ParseError("default_limit must be in [1, 100]");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("feed config: ") + e.what());
  }
}

FeedService::FeedService(FeedConfig config, store::Store& store, rec::RegenerationSink* regeneration,
                         const Clock& clock)
    : config_(std::move(config)), store_(store), regeneration_(regeneration), clock_(clock), postprocess_(1, "feed-post") {}

FeedService::~FeedService() {
  stop_keep_warm();
  postprocess_.wait_idle();
}

std::vector<std::string> FeedService::default_feed() const {
  auto recs = store_.get_recs(store::kDefaultFeedUser, config_.served_algorithm);
  return recs ? recs->uris() : std::vector<std::string>{};
}

rec::AssemblyFlags FeedService::session_flags(const std::string& user_id, const store::UserRecord& user,
                                              bool new_session) {
  std::lock_guard lock(flags_mu_);
  if (new_session) {
    const auto flags = rec::assembly_flags(user);
    session_flags_[user_id] = flags;
    return flags;
  }
  if (const auto it = session_flags_.find(user_id); it != session_flags_.end()) return it->second;
  return rec::assembly_flags(user);
}

FeedPage FeedService::get_feed_skeleton(const AuthContext& auth, int limit, const std::optional<std::string>& cursor) {
  if (limit < kMinLimit || limit > kMaxLimit) {
    throw ValidationError("limit must be between 1 and 100, got " + std::to_string(limit));
  }
  ServingScope scope;
  requests_.fetch_add(1, std::memory_order_relaxed);
  const Timestamp now = clock_.now();
  const std::size_t offset = parse_cursor(cursor);

  if (!auth.user_id) {
    logged_out_.fetch_add(1, std::memory_order_relaxed);
    const auto items = default_feed();
    return paginate(items, offset, limit);
  }

  const std::string& user_id = *auth.user_id;
  const auto user = store_.get_user(user_id);
  if (!user) {
    first_time_.fetch_add(1, std::memory_order_relaxed);
    FeedPage page;
    page.post_uris.push_back(config_.system_posts.refresh_prompt);
    enqueue({user_id, now, limit, cursor, page.post_uris, true, false, false});
    if (regeneration_) regeneration_->request_regeneration(user_id);
    return page;
  }

  const bool new_session = !cursor.has_value();
  const auto flags = session_flags(user_id, *user, new_session);
  const auto recs = store_.get_recs(user_id, config_.served_algorithm);
  const std::vector<std::string> body = recs ? recs->uris() : std::vector<std::string>{};
  const auto fallback = body.size() < rec::kLowContentThreshold ? default_feed() : std::vector<std::string>{};
  const auto served = rec::assemble_served_list(flags, body, fallback, config_.system_posts);
  FeedPage page = paginate(served, offset, limit);

  enqueue({user_id, now, limit, cursor, page.post_uris, false, new_session, new_session && flags.show_consent});
  if (new_session) {
    sessions_.fetch_add(1, std::memory_order_relaxed);
    if (regeneration_) regeneration_->request_regeneration(user_id);
  }
  return page;
}

void FeedService::enqueue(Postprocess job) {
  postprocess_.submit([this, job = std::move(job)] {
    try {
      apply(job);
    } catch (const std::exception& e) {
      LOG(ERROR) << "feed postprocess for " << job.user_id << " failed: " << e.what();
    }
  });
}

void FeedService::apply(const Postprocess& job) {
  if (job.first_time) {
    store::UserRecord fresh;
    fresh.user_id = job.user_id;
    fresh.first_access_at = job.requested_at;
    store_.put_user_if_absent(fresh);
  } else if (job.session) {
    store_.update_user(job.user_id, [&](std::optional<store::UserRecord> current) -> std::optional<store::UserRecord> {
      if (!current) return std::nullopt;
      ++current->access_count;
      if (job.consent_shown && current->consent_views < store::kConsentVisits) ++current->consent_views;
      return current;
    });
  }
  store_.append_access_log({job.user_id, job.requested_at, job.limit, job.cursor, job.served});
  access_logs_.fetch_add(1, std::memory_order_relaxed);
}

bool FeedService::serves_feed(std::string_view feed_uri) const {
  return std::find(config_.feed_uris.begin(), config_.feed_uris.end(), feed_uri) != config_.feed_uris.end();
}

nlohmann::json FeedService::describe_feed_generator() const {
  nlohmann::json feeds = nlohmann::json::array();
  for (const auto& uri : config_.feed_uris) feeds.push_back({{"uri", uri}});
  return {{"did", config_.service_did()}, {"feeds", feeds}};
}

nlohmann::json FeedService::did_document() const {
  return {{"@context", {"https://www.w3.org/ns/did/v1"}},
          {"id", config_.service_did()},
          {"service",
           {{{"id", "#bsky_fg"},
             {"type", "BskyFeedGenerator"},
             {"serviceEndpoint", "https://" + config_.hostname}}}}};
}

void FeedService::keep_warm() {
  (void)store_.get_recs(store::kDefaultFeedUser, config_.served_algorithm);
  pings_.fetch_add(1, std::memory_order_relaxed);
}

void FeedService::start_keep_warm() {
  if (keep_warm_task_) return;
  keep_warm_task_ = std::make_unique<PeriodicTask>(config_.keep_warm_period, [this] { keep_warm(); });
}

void FeedService::stop_keep_warm() {
  if (keep_warm_task_) {
    keep_warm_task_->stop();
    keep_warm_task_.reset();
  }
}

void FeedService::drain() { postprocess_.wait_idle(); }

FeedStats FeedService::stats() const {
  return {requests_.load(), logged_out_.load(), first_time_.load(), sessions_.load(), access_logs_.load(), pings_.load()};
}

}  // namespace paperfeed::feed
