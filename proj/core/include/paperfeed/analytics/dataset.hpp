#pragma once

#include <filesystem>
#include <vector>

#include "paperfeed/store/store.hpp"
#include "paperfeed/store/types.hpp"

namespace paperfeed::analytics {

/// Immutable analysis inputs read from store exports. Access logs of
/// opted-out users dated at or after their opt-out are already removed.
struct Dataset {
  std::vector<store::StoredPost> posts;
  std::vector<store::InteractionRecord> interactions;
  std::vector<store::UserRecord> users;
  std::vector<store::AccessLog> access_logs;
};

/// Drops access logs of opted-out users at or after opted_out_at.
void apply_opt_out(Dataset& data);

/// Reads `<dir>/<table>.jsonl` for posts, interactions, users and
/// access_logs (missing files read as empty tables) and applies the opt-out
/// filter.
Dataset load_exports(const std::filesystem::path& dir);

/// Same, straight from a live store.
Dataset snapshot(const store::Store& store);

}  // namespace paperfeed::analytics
