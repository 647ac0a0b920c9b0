#include "paperfeed/store/codec.hpp"

#include "paperfeed/common/errors.hpp"

namespace paperfeed::store {
namespace {

using nlohmann::json;

json opt_string(const std::optional<std::string>& value) { return value ? json(*value) : json(nullptr); }

std::optional<std::string> read_opt_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

Timestamp read_time(const json& j, const char* key) { return parse_timestamp(j.at(key).get<std::string>()); }

}  // namespace

std::string_view to_string(InteractionKind kind) { return kind == InteractionKind::like ? "like" : "repost"; }

InteractionKind parse_interaction_kind(std::string_view text) {
  if (text == "like") return InteractionKind::like;
  if (text == "repost") return InteractionKind::repost;
  throw ParseError("unknown interaction kind '" + std::string(text) + "'");
}

std::vector<std::string> RecommendationList::uris() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.uri);
  return out;
}

void to_json(json& j, const StoredPost& p) {
  j = json{{"uri", p.uri},
           {"author_id", p.author_id},
           {"text", p.text},
           {"links", p.links},
           {"arxiv_ids", p.arxiv_ids},
           {"created_at", format_timestamp(p.created_at)},
           {"deleted", p.deleted},
           {"ingested_at", format_timestamp(p.ingested_at)},
           {"reply_parent", opt_string(p.reply_parent)},
           {"quote_of", opt_string(p.quote_of)}};
}

void from_json(const json& j, StoredPost& p) {
  p.uri = j.at("uri").get<std::string>();
  p.author_id = j.at("author_id").get<std::string>();
  p.text = j.value("text", std::string{});
  p.links = j.value("links", std::vector<std::string>{});
  p.arxiv_ids = j.value("arxiv_ids", std::vector<std::string>{});
  p.created_at = read_time(j, "created_at");
  p.deleted = j.value("deleted", false);
  p.ingested_at = j.contains("ingested_at") ? read_time(j, "ingested_at") : p.created_at;
  p.reply_parent = read_opt_string(j, "reply_parent");
  p.quote_of = read_opt_string(j, "quote_of");
}

void to_json(json& j, const InteractionRecord& r) {
  j = json{{"actor_id", r.actor_id},
           {"subject_uri", r.subject_uri},
           {"kind", to_string(r.kind)},
           {"created_at", format_timestamp(r.created_at)}};
}

void from_json(const json& j, InteractionRecord& r) {
  r.actor_id = j.at("actor_id").get<std::string>();
  r.subject_uri = j.at("subject_uri").get<std::string>();
  r.kind = parse_interaction_kind(j.at("kind").get<std::string>());
  r.created_at = read_time(j, "created_at");
}

void to_json(json& j, const UserRecord& u) {
  j = json{{"user_id", u.user_id},
           {"first_access_at", format_timestamp(u.first_access_at)},
           {"access_count", u.access_count},
           {"consent_views", u.consent_views},
           {"opted_out", u.opted_out},
           {"opted_out_at", u.opted_out_at ? json(format_timestamp(*u.opted_out_at)) : json(nullptr)}};
}

void from_json(const json& j, UserRecord& u) {
  u.user_id = j.at("user_id").get<std::string>();
  u.first_access_at = read_time(j, "first_access_at");
  u.access_count = j.value("access_count", std::uint64_t{0});
  u.consent_views = j.value("consent_views", 0);
  u.opted_out = j.value("opted_out", false);
  const auto at = read_opt_string(j, "opted_out_at");
  u.opted_out_at = at ? std::optional(parse_timestamp(*at)) : std::nullopt;
}

void to_json(json& j, const RecommendationList& r) {
  json uris = json::array();
  json ranked = json::array();
  for (const auto& item : r.items) {
    uris.push_back(item.uri);
    ranked.push_back(format_timestamp(item.ranked_at));
  }
  j = json{{"user_id", r.user_id},
           {"algorithm_id", r.algorithm_id},
           {"post_uris", std::move(uris)},
           {"ranked_at", std::move(ranked)},
           {"generated_at", format_timestamp(r.generated_at)}};
}

void from_json(const json& j, RecommendationList& r) {
  r.user_id = j.at("user_id").get<std::string>();
  r.algorithm_id = j.at("algorithm_id").get<std::string>();
  r.generated_at = read_time(j, "generated_at");
  const auto& uris = j.at("post_uris");
  const auto& ranked = j.at("ranked_at");
  if (uris.size() != ranked.size()) throw ParseError("post_uris and ranked_at differ in length");
  r.items.clear();
  r.items.reserve(uris.size());
  for (std::size_t i = 0; i < uris.size(); ++i) {
    r.items.push_back({uris[i].get<std::string>(), parse_timestamp(ranked[i].get<std::string>())});
  }
}

void to_json(json& j, const CounterfactualRecord& r) {
  j = json{{"user_id", r.user_id},
           {"algorithm_id", r.algorithm_id},
           {"generated_at", format_timestamp(r.generated_at)},
           {"post_uris", r.post_uris}};
}

void from_json(const json& j, CounterfactualRecord& r) {
  r.user_id = j.at("user_id").get<std::string>();
  r.algorithm_id = j.at("algorithm_id").get<std::string>();
  r.generated_at = read_time(j, "generated_at");
  r.post_uris = j.at("post_uris").get<std::vector<std::string>>();
}

void to_json(json& j, const AccessLog& a) {
  j = json{{"user_id", a.user_id},
           {"requested_at", format_timestamp(a.requested_at)},
           {"limit", a.limit},
           {"cursor", opt_string(a.cursor)},
           {"served_uris", a.served_uris}};
}

void from_json(const json& j, AccessLog& a) {
  a.user_id = j.at("user_id").get<std::string>();
  a.requested_at = read_time(j, "requested_at");
  a.limit = j.at("limit").get<int>();
  a.cursor = read_opt_string(j, "cursor");
  a.served_uris = j.at("served_uris").get<std::vector<std::string>>();
}

}  // namespace paperfeed::store
