#include "paperfeed/analytics/dataset.hpp"

#include <map>
#include <sstream>

#include "paperfeed/common/jsonl.hpp"
#include "paperfeed/store/codec.hpp"

namespace paperfeed::analytics {

namespace {

template <typename T>
std::vector<T> read_table(const std::filesystem::path& path) {
  std::vector<T> rows;
  if (!std::filesystem::exists(path)) return rows;
  for_each_jsonl(path, [&](const nlohmann::json& j) { rows.push_back(j.get<T>()); });
  return rows;
}

template <typename T>
std::vector<T> read_store(const store::Store& s, store::Table table) {
  std::vector<T> rows;
  s.for_each_row(table, [&](std::string_view json) { rows.push_back(nlohmann::json::parse(json).get<T>()); });
  return rows;
}

}  // namespace

void apply_opt_out(Dataset& data) {
  std::map<std::string, Timestamp, std::less<>> cutoff;
  for (const auto& u : data.users) {
    if (u.opted_out) cutoff[u.user_id] = u.opted_out_at.value_or(Timestamp::min());
  }
  if (cutoff.empty()) return;
  std::erase_if(data.access_logs, [&](const store::AccessLog& log) {
    const auto it = cutoff.find(log.user_id);
    return it != cutoff.end() && log.requested_at >= it->second;
  });
}

Dataset load_exports(const std::filesystem::path& dir) {
  Dataset d;
  d.posts = read_table<store::StoredPost>(dir / "posts.jsonl");
  d.interactions = read_table<store::InteractionRecord>(dir / "interactions.jsonl");
  d.users = read_table<store::UserRecord>(dir / "users.jsonl");
  d.access_logs = read_table<store::AccessLog>(dir / "access_logs.jsonl");
  apply_opt_out(d);
  return d;
}

Dataset snapshot(const store::Store& s) {
  Dataset d;
  d.posts = read_store<store::StoredPost>(s, store::Table::posts);
  d.interactions = read_store<store::InteractionRecord>(s, store::Table::interactions);
  d.users = read_store<store::UserRecord>(s, store::Table::users);
  d.access_logs = read_store<store::AccessLog>(s, store::Table::access_logs);
  apply_opt_out(d);
  return d;
}

}  // namespace paperfeed::analytics
