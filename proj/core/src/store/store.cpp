#include "paperfeed/store/store.hpp"

#include <cstdio>
#include <istream>
#include <mutex>
#include <ostream>

#include <nlohmann/json.hpp>

#include "paperfeed/common/errors.hpp"
#include "paperfeed/common/jsonl.hpp"
#include "paperfeed/store/codec.hpp"

namespace paperfeed::store {
namespace {

using nlohmann::json;

constexpr char kSep = '\0';

constexpr std::string_view kPostPrefix = "p/";
constexpr std::string_view kAuthorPrefix = "a/";
constexpr std::string_view kInteractionPrefix = "i/";
constexpr std::string_view kRepostPrefix = "r/";
constexpr std::string_view kUserPrefix = "u/";
constexpr std::string_view kRecsPrefix = "c/";
constexpr std::string_view kCounterfactualPrefix = "f/";
constexpr std::string_view kAccessLogPrefix = "l/";
// Per-post liveness ("" live, "d" deleted) so index scans can skip deleted
// subjects without decoding post rows.
constexpr std::string_view kPostStatePrefix = "s/";
constexpr std::string_view kDeletedState = "d";

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Order-preserving unsigned image of a signed timestamp.
std::uint64_t biased(Timestamp t) { return static_cast<std::uint64_t>(to_micros(t)) ^ (1ull << 63); }

std::string ascending_time(Timestamp t) { return hex16(biased(t)); }
std::string descending_time(Timestamp t) { return hex16(~biased(t)); }

Timestamp from_descending_time(std::string_view hex) {
  const std::uint64_t v = std::stoull(std::string(hex), nullptr, 16);
  return from_micros(static_cast<std::int64_t>(~v ^ (1ull << 63)));
}

// Author index entries carry a one-byte flag so ranking can skip quote
// posts without decoding the post.
constexpr std::string_view kQuoteFlag = "q";

std::string author_value(const StoredPost& p) { return p.quote_of ? std::string(kQuoteFlag) : std::string(); }

std::string join(std::string_view prefix, std::initializer_list<std::string_view> parts) {
  std::string key(prefix);
  bool first = true;
  for (auto part : parts) {
    if (!first) key.push_back(kSep);
    key.append(part);
    first = false;
  }
  return key;
}

std::string post_key(std::string_view uri) { return join(kPostPrefix, {uri}); }

std::string author_key(const StoredPost& p) {
  return join(kAuthorPrefix, {p.author_id, descending_time(p.created_at), p.uri});
}

std::string author_prefix(std::string_view author) { return join(kAuthorPrefix, {author, ""}); }

std::string interaction_key(const InteractionRecord& r) {
  return join(kInteractionPrefix, {r.actor_id, r.subject_uri, to_string(r.kind)});
}

std::string repost_key(const InteractionRecord& r) {
  return join(kRepostPrefix, {r.actor_id, descending_time(r.created_at), r.subject_uri});
}

std::string user_key(std::string_view id) { return join(kUserPrefix, {id}); }

std::string recs_key(std::string_view user, std::string_view algo) { return join(kRecsPrefix, {user, algo}); }

std::string counterfactual_key(const CounterfactualRecord& r) {
  return join(kCounterfactualPrefix, {r.user_id, r.algorithm_id, ascending_time(r.generated_at)});
}

std::string access_log_key(std::uint64_t seq) { return std::string(kAccessLogPrefix) + hex16(seq); }

std::string post_state_key(std::string_view uri) { return std::string(kPostStatePrefix) + std::string(uri); }

std::string post_state(const StoredPost& p) { return p.deleted ? std::string(kDeletedState) : std::string(); }

std::string_view table_prefix(Table table) {
  switch (table) {
    case Table::posts: return kPostPrefix;
    case Table::interactions: return kInteractionPrefix;
    case Table::users: return kUserPrefix;
    case Table::recs: return kRecsPrefix;
    case Table::counterfactuals: return kCounterfactualPrefix;
    case Table::access_logs: return kAccessLogPrefix;
  }
  return {};
}

template <typename T>
T decode(std::string_view value) {
  return json::parse(value).get<T>();
}

template <typename T>
std::string encode(const T& row) {
  return json(row).dump();
}

}  // namespace

std::string_view to_string(Table table) {
  switch (table) {
    case Table::posts: return "posts";
    case Table::interactions: return "interactions";
    case Table::users: return "users";
    case Table::recs: return "recs";
    case Table::counterfactuals: return "counterfactuals";
    case Table::access_logs: return "access_logs";
  }
  return "?";
}

Table parse_table(std::string_view name) {
  for (Table t : kAllTables) {
    if (to_string(t) == name) return t;
  }
  throw ParseError("unknown table '" + std::string(name) + "'");
}

Store::Store(std::unique_ptr<KvBackend> backend) : kv_(std::move(backend)) {
  kv_->scan_reverse(kAccessLogPrefix, [&](std::string_view key, std::string_view) {
    next_log_seq_ = std::stoull(std::string(key.substr(kAccessLogPrefix.size())), nullptr, 16) + 1;
    return false;
  });
}

bool Store::put_post(const StoredPost& post) {
  if (post.uri.empty() || post.author_id.empty()) throw ValidationError("post needs uri and author_id");
  std::unique_lock lock(mu_);
  const auto key = post_key(post.uri);
  if (kv_->get(key)) return false;
  WriteBatch batch;
  batch.put(key, encode(post));
  batch.put(post_state_key(post.uri), post_state(post));
  if (!post.deleted) batch.put(author_key(post), author_value(post));
  kv_->apply(batch);
  return true;
}

std::optional<StoredPost> Store::get_post(std::string_view uri) const {
  std::shared_lock lock(mu_);
  auto value = kv_->get(post_key(uri));
  if (!value) return std::nullopt;
  return decode<StoredPost>(*value);
}

bool Store::contains_post(std::string_view uri) const {
  std::shared_lock lock(mu_);
  return kv_->get(post_key(uri)).has_value();
}

std::vector<StoredPost> Store::recent_posts_by_author(std::string_view author_id, std::size_t n,
                                                      const std::function<bool(const StoredPost&)>& keep) const {
  if (n == 0) throw ValidationError("recent_posts_by_author: n must be >= 1");
  std::shared_lock lock(mu_);
  std::vector<StoredPost> out;
  const std::string prefix = author_prefix(author_id);
  kv_->scan(prefix, [&](std::string_view key, std::string_view) {
    const auto uri_start = key.find(kSep, prefix.size());
    const std::string_view uri = key.substr(uri_start + 1);
    auto value = kv_->get(post_key(uri));
    if (!value) return true;
    auto post = decode<StoredPost>(*value);
    if (post.deleted || (keep && !keep(post))) return true;
    out.push_back(std::move(post));
    return out.size() < n;
  });
  return out;
}

bool Store::mark_deleted(std::string_view uri) {
  std::unique_lock lock(mu_);
  const auto key = post_key(uri);
  auto value = kv_->get(key);
  if (!value) return false;
  auto post = decode<StoredPost>(*value);
  if (post.deleted) return true;
  WriteBatch batch;
  batch.erase(author_key(post));
  post.deleted = true;
  batch.put(key, encode(post));
  batch.put(post_state_key(uri), std::string(kDeletedState));
  kv_->apply(batch);
  return true;
}

bool Store::put_interaction(const InteractionRecord& record) {
  std::unique_lock lock(mu_);
  const auto key = interaction_key(record);
  if (kv_->get(key)) return false;
  WriteBatch batch;
  batch.put(key, encode(record));
  if (record.kind == InteractionKind::repost) batch.put(repost_key(record), {});
  kv_->apply(batch);
  return true;
}

std::vector<InteractionRecord> Store::interactions_by_actor(std::string_view actor_id) const {
  std::shared_lock lock(mu_);
  std::vector<InteractionRecord> out;
  kv_->scan(join(kInteractionPrefix, {actor_id, ""}), [&](std::string_view, std::string_view value) {
    out.push_back(decode<InteractionRecord>(value));
    return true;
  });
  return out;
}

std::vector<RankedPost> Store::recent_post_refs_by_author(std::string_view author_id, std::size_t n,
                                                          bool include_quotes) const {
  std::shared_lock lock(mu_);
  std::vector<RankedPost> out;
  if (n == 0) return out;
  const std::string prefix = author_prefix(author_id);
  kv_->scan(prefix, [&](std::string_view key, std::string_view value) {
    if (!include_quotes && value == kQuoteFlag) return true;
    const auto uri_start = key.find(kSep, prefix.size());
    out.push_back({std::string(key.substr(uri_start + 1)),
                   from_descending_time(key.substr(prefix.size(), uri_start - prefix.size()))});
    return out.size() < n;
  });
  return out;
}

std::vector<InteractionRecord> Store::recent_reposts_by_actor(std::string_view actor_id, std::size_t n) const {
  std::shared_lock lock(mu_);
  std::vector<InteractionRecord> out;
  if (n == 0) return out;
  const std::string prefix = join(kRepostPrefix, {actor_id, ""});
  kv_->scan(prefix, [&](std::string_view key, std::string_view) {
    const auto subject_start = key.find(kSep, prefix.size()) + 1;
    InteractionRecord probe{std::string(actor_id), std::string(key.substr(subject_start)), InteractionKind::repost, {}};
    const auto state = kv_->get(post_state_key(probe.subject_uri));
    if (!state || *state == kDeletedState) return true;
    auto value = kv_->get(interaction_key(probe));
    if (!value) return true;
    out.push_back(decode<InteractionRecord>(*value));
    return out.size() < n;
  });
  return out;
}

std::vector<RankedPost> Store::recent_repost_refs_by_actor(std::string_view actor_id, std::size_t n) const {
  std::shared_lock lock(mu_);
  std::vector<RankedPost> out;
  if (n == 0) return out;
  const std::string prefix = join(kRepostPrefix, {actor_id, ""});
  kv_->scan(prefix, [&](std::string_view key, std::string_view) {
    const auto time_end = key.find(kSep, prefix.size());
    std::string subject(key.substr(time_end + 1));
    const auto state = kv_->get(post_state_key(subject));
    if (!state || *state == kDeletedState) return true;
    out.push_back({std::move(subject), from_descending_time(key.substr(prefix.size(), time_end - prefix.size()))});
    return out.size() < n;
  });
  return out;
}

std::optional<UserRecord> Store::get_user(std::string_view user_id) const {
  std::shared_lock lock(mu_);
  auto value = kv_->get(user_key(user_id));
  if (!value) return std::nullopt;
  return decode<UserRecord>(*value);
}

namespace {

void validate_user(const UserRecord& user) {
  if (user.user_id.empty()) throw ValidationError("user_id must be non-empty");
  if (user.user_id == kDefaultFeedUser) throw ValidationError("user id '__default__' is reserved");
  if (user.consent_views < 0 || user.consent_views > kConsentVisits) {
    throw ValidationError("consent_views must be within 0..5");
  }
}

}  // namespace

void Store::put_user(const UserRecord& user) {
  validate_user(user);
  std::unique_lock lock(mu_);
  WriteBatch batch;
  batch.put(user_key(user.user_id), encode(user));
  kv_->apply(batch);
}

bool Store::put_user_if_absent(const UserRecord& user) {
  validate_user(user);
  std::unique_lock lock(mu_);
  const auto key = user_key(user.user_id);
  if (kv_->get(key)) return false;
  WriteBatch batch;
  batch.put(key, encode(user));
  kv_->apply(batch);
  return true;
}

std::optional<UserRecord> Store::update_user(
    std::string_view user_id, const std::function<std::optional<UserRecord>(std::optional<UserRecord>)>& mutate) {
  std::unique_lock lock(mu_);
  const auto key = user_key(user_id);
  std::optional<UserRecord> current;
  if (auto value = kv_->get(key)) current = decode<UserRecord>(*value);
  auto next = mutate(current);
  if (!next) return current;
  if (next->user_id != user_id) throw ValidationError("update_user must not change user_id");
  validate_user(*next);
  if (current && next->access_count < current->access_count) {
    throw ValidationError("access_count must not decrease");
  }
  WriteBatch batch;
  batch.put(key, encode(*next));
  kv_->apply(batch);
  return next;
}

std::vector<std::string> Store::user_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  kv_->scan(kUserPrefix, [&](std::string_view key, std::string_view) {
    out.emplace_back(key.substr(kUserPrefix.size()));
    return true;
  });
  return out;
}

void Store::set_opted_out(std::string_view user_id, Timestamp at) {
  std::unique_lock lock(mu_);
  const auto key = user_key(user_id);
  UserRecord user;
  if (auto value = kv_->get(key)) {
    user = decode<UserRecord>(*value);
  } else {
    user.user_id = std::string(user_id);
    user.first_access_at = at;
  }
  validate_user(user);
  WriteBatch batch;
  if (!user.opted_out) {
    user.opted_out = true;
    user.opted_out_at = at;
  }
  batch.put(key, encode(user));
  kv_->scan(join(kCounterfactualPrefix, {user_id, ""}), [&](std::string_view cf_key, std::string_view) {
    batch.erase(std::string(cf_key));
    return true;
  });
  kv_->apply(batch);
}

bool Store::put_recs(const RecommendationList& recs) {
  if (recs.items.size() > kMaxRecommendations) throw ValidationError("recommendation list longer than 150");
  std::unique_lock lock(mu_);
  const auto key = recs_key(recs.user_id, recs.algorithm_id);
  if (auto value = kv_->get(key)) {
    if (decode<RecommendationList>(*value).generated_at > recs.generated_at) return false;
  }
  WriteBatch batch;
  batch.put(key, encode(recs));
  kv_->apply(batch);
  return true;
}

std::optional<RecommendationList> Store::get_recs(std::string_view user_id, std::string_view algorithm_id) const {
  std::shared_lock lock(mu_);
  auto value = kv_->get(recs_key(user_id, algorithm_id));
  if (!value) return std::nullopt;
  return decode<RecommendationList>(*value);
}

bool Store::put_counterfactual(const CounterfactualRecord& record) {
  std::unique_lock lock(mu_);
  if (auto user = kv_->get(user_key(record.user_id)); user && decode<UserRecord>(*user).opted_out) return false;
  const auto key = counterfactual_key(record);
  if (kv_->get(key)) return false;
  WriteBatch batch;
  batch.put(key, encode(record));
  kv_->apply(batch);
  return true;
}

std::optional<CounterfactualRecord> Store::get_counterfactual(std::string_view user_id, std::string_view algorithm_id,
                                                             Timestamp generated_at) const {
  std::shared_lock lock(mu_);
  const auto value = kv_->get(join(kCounterfactualPrefix, {user_id, algorithm_id, ascending_time(generated_at)}));
  if (!value) return std::nullopt;
  return decode<CounterfactualRecord>(*value);
}

std::vector<CounterfactualRecord> Store::counterfactuals_for(std::string_view user_id) const {
  std::shared_lock lock(mu_);
  std::vector<CounterfactualRecord> out;
  kv_->scan(join(kCounterfactualPrefix, {user_id, ""}), [&](std::string_view, std::string_view value) {
    out.push_back(decode<CounterfactualRecord>(value));
    return true;
  });
  return out;
}

void Store::append_access_log(const AccessLog& log) {
  if (log.served_uris.size() > static_cast<std::size_t>(std::max(log.limit, 0))) {
    throw ValidationError("access log serves more posts than its limit");
  }
  std::unique_lock lock(mu_);
  WriteBatch batch;
  batch.put(access_log_key(next_log_seq_), encode(log));
  kv_->apply(batch);
  ++next_log_seq_;
}

std::vector<AccessLog> Store::access_logs_for(std::string_view user_id) const {
  std::shared_lock lock(mu_);
  std::vector<AccessLog> out;
  kv_->scan(kAccessLogPrefix, [&](std::string_view, std::string_view value) {
    auto log = decode<AccessLog>(value);
    if (log.user_id == user_id) out.push_back(std::move(log));
    return true;
  });
  return out;
}

void Store::for_each_row(Table table, const std::function<void(std::string_view json)>& visit) const {
  std::shared_lock lock(mu_);
  kv_->scan(table_prefix(table), [&](std::string_view, std::string_view value) {
    visit(value);
    return true;
  });
}

void Store::export_table(Table table, std::ostream& out) const {
  for_each_row(table, [&](std::string_view row) { out << row << '\n'; });
}

std::size_t Store::count(Table table) const {
  std::size_t n = 0;
  for_each_row(table, [&](std::string_view) { ++n; });
  return n;
}

void Store::import_table(Table table, std::istream& in) {
  for_each_jsonl(in, [&](const json& row) {
    switch (table) {
      case Table::posts: {
        auto post = row.get<StoredPost>();
        std::unique_lock lock(mu_);
        WriteBatch batch;
        if (auto old = kv_->get(post_key(post.uri))) batch.erase(author_key(decode<StoredPost>(*old)));
        batch.put(post_key(post.uri), encode(post));
        batch.put(post_state_key(post.uri), post_state(post));
        if (!post.deleted) batch.put(author_key(post), author_value(post));
        kv_->apply(batch);
        break;
      }
      case Table::interactions: put_interaction(row.get<InteractionRecord>()); break;
      case Table::users: put_user(row.get<UserRecord>()); break;
      case Table::recs: put_recs(row.get<RecommendationList>()); break;
      case Table::counterfactuals: {
        auto record = row.get<CounterfactualRecord>();
        std::unique_lock lock(mu_);
        WriteBatch batch;
        batch.put(counterfactual_key(record), encode(record));
        kv_->apply(batch);
        break;
      }
      case Table::access_logs: append_access_log(row.get<AccessLog>()); break;
    }
  });
}

std::unique_ptr<Store> make_memory_store() { return std::make_unique<Store>(std::make_unique<MemoryKv>()); }

std::unique_ptr<Store> open_file_store(const std::filesystem::path& path) {
  return std::make_unique<Store>(std::make_unique<FileKv>(path));
}

}  // namespace paperfeed::store
