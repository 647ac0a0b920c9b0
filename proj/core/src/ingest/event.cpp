#include "paperfeed/ingest/event.hpp"

#include <algorithm>

#include "paperfeed/common/errors.hpp"

namespace paperfeed::ingest {
namespace {

using nlohmann::json;

json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::string> read_opt(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

bool is_url_terminator(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '<' || c == '>' || c == '"' || c == '\'';
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::post_create: return "post_create";
    case EventKind::post_delete: return "post_delete";
    case EventKind::like: return "like";
    case EventKind::repost: return "repost";
    case EventKind::follow: return "follow";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view text) {
  for (auto kind : {EventKind::post_create, EventKind::post_delete, EventKind::like, EventKind::repost,
                    EventKind::follow}) {
    if (to_string(kind) == text) return kind;
  }
  throw ParseError("unknown event kind '" + std::string(text) + "'");
}

bool is_relevant(EventKind kind) { return kind != EventKind::follow; }

void validate(const EventEnvelope& event) {
  switch (event.kind) {
    case EventKind::post_create:
      if (!event.record) throw ValidationError("post_create event " + std::to_string(event.seq) + " lacks a record");
      if (event.record->uri.empty() || event.record->author_id.empty()) {
        throw ValidationError("post_create event " + std::to_string(event.seq) + " has an empty uri or author");
      }
      break;
    case EventKind::post_delete:
    case EventKind::like:
    case EventKind::repost:
      if (!event.subject_uri || event.subject_uri->empty()) {
        throw ValidationError(std::string(to_string(event.kind)) + " event " + std::to_string(event.seq) +
                              " lacks subject_uri");
      }
      break;
    case EventKind::follow: break;
  }
}

std::vector<std::string> collect_links(std::string_view text, const std::vector<std::string>& metadata_links) {
  std::vector<std::string> links;
  auto add = [&](std::string link) {
    if (!link.empty() && std::find(links.begin(), links.end(), link) == links.end()) links.push_back(std::move(link));
  };
  for (const auto& link : metadata_links) add(link);

  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto http = text.find("http://", pos);
    const auto https = text.find("https://", pos);
    const auto start = std::min(http, https);
    if (start == std::string_view::npos) break;
    auto end = start;
    while (end < text.size() && !is_url_terminator(text[end])) ++end;
    auto url = text.substr(start, end - start);
    while (!url.empty() && std::string_view(".,;:!?)]}").find(url.back()) != std::string_view::npos) {
      url.remove_suffix(1);
    }
    if (url.find("://") + 3 < url.size()) add(std::string(url));
    pos = end;
  }
  return links;
}

EventEnvelope event_from_json(const json& j) {
  EventEnvelope event;
  try {
    event.seq = j.at("seq").get<std::uint64_t>();
    event.kind = parse_event_kind(j.at("kind").get<std::string>());
    event.actor_id = j.value("actor_id", std::string{});
    event.subject_uri = read_opt(j, "subject_uri");
    event.created_at = parse_timestamp(j.at("created_at").get<std::string>());
    const auto received = read_opt(j, "received_at");
    event.received_at = received ? parse_timestamp(*received) : event.created_at;
    if (const auto it = j.find("record"); it != j.end() && !it->is_null()) {
      const json& r = *it;
      PostPayload payload;
      payload.uri = r.at("uri").get<std::string>();
      payload.author_id = r.value("author_id", event.actor_id);
      payload.text = r.value("text", std::string{});
      payload.links = collect_links(payload.text, r.value("links", std::vector<std::string>{}));
      const auto created = read_opt(r, "created_at");
      payload.created_at = created ? parse_timestamp(*created) : event.created_at;
      payload.reply_parent = read_opt(r, "reply_parent");
      payload.repost_of = read_opt(r, "repost_of");
      payload.quote_of = read_opt(r, "quote_of");
      event.record = std::move(payload);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed event: ") + e.what());
  }
  validate(event);
  return event;
}

json event_to_json(const EventEnvelope& event) {
  json j{{"seq", event.seq},
         {"kind", to_string(event.kind)},
         {"actor_id", event.actor_id},
         {"subject_uri", opt(event.subject_uri)},
         {"created_at", format_timestamp(event.created_at)},
         {"received_at", format_timestamp(event.received_at)},
         {"record", nullptr}};
  if (event.record) {
    const auto& r = *event.record;
    j["record"] = json{{"uri", r.uri},
                       {"author_id", r.author_id},
                       {"text", r.text},
                       {"links", r.links},
                       {"created_at", format_timestamp(r.created_at)},
                       {"reply_parent", opt(r.reply_parent)},
                       {"repost_of", opt(r.repost_of)},
                       {"quote_of", opt(r.quote_of)}};
  }
  return j;
}

EventEnvelope parse_event_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("event line is not JSON: ") + e.what());
  }
  return event_from_json(j);
}

std::string to_json_line(const EventEnvelope& event) { return event_to_json(event).dump(); }

}  // namespace paperfeed::ingest
