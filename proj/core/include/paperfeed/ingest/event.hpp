#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "paperfeed/common/time.hpp"

namespace paperfeed::ingest {

enum class EventKind { post_create, post_delete, like, repost, follow };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

/// Kinds the ingest pipeline acts on; everything else is dropped and counted.
bool is_relevant(EventKind kind);

struct PostPayload {
  std::string uri;
  std::string author_id;
  std::string text;
  /// Union of inline and embed/metadata links, deduplicated, in order.
  std::vector<std::string> links;
  Timestamp created_at{};
  std::optional<std::string> reply_parent;
  std::optional<std::string> repost_of;
  std::optional<std::string> quote_of;

  bool operator==(const PostPayload&) const = default;
};

struct EventEnvelope {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::post_create;
  std::string actor_id;
  std::optional<std::string> subject_uri;
  std::optional<PostPayload> record;
  Timestamp created_at{};
  Timestamp received_at{};

  bool operator==(const EventEnvelope&) const = default;
};

/// Throws ValidationError when required fields for the kind are missing.
void validate(const EventEnvelope& event);

/// Canonical JSON-lines wire form. Field names: seq, kind, actor_id,
/// subject_uri, record{uri, author_id, text, links, created_at,
/// reply_parent, repost_of, quote_of}, created_at, received_at. A missing
/// received_at defaults to created_at. Parsing normalizes record links
/// (see collect_links) and validates the envelope.
EventEnvelope event_from_json(const nlohmann::json& j);
nlohmann::json event_to_json(const EventEnvelope& event);
EventEnvelope parse_event_line(std::string_view line);
std::string to_json_line(const EventEnvelope& event);

/// Metadata links first, then http(s) URLs appearing in the text;
/// deduplicated, order-preserving.
std::vector<std::string> collect_links(std::string_view text, const std::vector<std::string>& metadata_links);

}  // namespace paperfeed::ingest
