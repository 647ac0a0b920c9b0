#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "paperfeed/store/kv.hpp"
#include "paperfeed/store/types.hpp"

namespace paperfeed::store {

enum class Table { posts, interactions, users, recs, counterfactuals, access_logs };

std::string_view to_string(Table table);
Table parse_table(std::string_view name);
inline constexpr Table kAllTables[] = {Table::posts,  Table::interactions,    Table::users,
                                       Table::recs,   Table::counterfactuals, Table::access_logs};

/// Reserved user key under which the default (non-personalized) feed lives.
inline constexpr std::string_view kDefaultFeedUser = "__default__";

/// Typed persistence for posts (with an author/time index), interactions,
/// users, cached recommendations, counterfactual rankings and access logs.
///
/// Every operation is safe for concurrent callers. Multi-key writes go
/// through one WriteBatch so they land atomically. Backend failures surface
/// as StoreUnavailable.
class Store {
 public:
  explicit Store(std::unique_ptr<KvBackend> backend);

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // Posts -------------------------------------------------------------

  /// Inserts the post unless its uri is already present (in which case the
  /// stored row, including its deleted flag, is left untouched). Returns
  /// whether a row was written.
  bool put_post(const StoredPost& post);
  std::optional<StoredPost> get_post(std::string_view uri) const;

  /// True iff the uri was ever stored as a paper post, deleted or not.
  bool contains_post(std::string_view uri) const;

  /// Up to n non-deleted posts by the author, newest first, ties broken by
  /// uri ascending. Posts rejected by `keep` are skipped without counting
  /// against n.
  std::vector<StoredPost> recent_posts_by_author(
      std::string_view author_id, std::size_t n,
      const std::function<bool(const StoredPost&)>& keep = {}) const;

  /// Index-only form of recent_posts_by_author for ranking: (uri,
  /// created_at) of up to n non-deleted posts, newest first, skipping quote
  /// posts unless `include_quotes`.
  std::vector<RankedPost> recent_post_refs_by_author(std::string_view author_id, std::size_t n,
                                                     bool include_quotes) const;

  /// Returns false (and changes nothing) for unknown uris.
  bool mark_deleted(std::string_view uri);

  // Interactions ------------------------------------------------------

  /// Idempotent on (actor_id, subject_uri, kind). Returns whether a row was
  /// written. Reposts are also indexed by (actor, time) for ranking.
  bool put_interaction(const InteractionRecord& record);
  std::vector<InteractionRecord> interactions_by_actor(std::string_view actor_id) const;

  /// The actor's reposts, newest first (ties: subject uri ascending).
  /// Reposts of deleted posts are skipped. Stops after n results.
  std::vector<InteractionRecord> recent_reposts_by_actor(std::string_view actor_id, std::size_t n) const;

  /// Index-only form of recent_reposts_by_actor: (subject uri, repost time).
  std::vector<RankedPost> recent_repost_refs_by_actor(std::string_view actor_id, std::size_t n) const;

  // Users -------------------------------------------------------------

  std::optional<UserRecord> get_user(std::string_view user_id) const;
  void put_user(const UserRecord& user);

  /// Inserts the record unless the user exists. Returns whether it was new.
  bool put_user_if_absent(const UserRecord& user);

  /// Atomic read-modify-write. `mutate` receives the current record (or
  /// nullopt) and returns the record to store, or nullopt to leave the
  /// user as is. Returns the final stored value.
  std::optional<UserRecord> update_user(
      std::string_view user_id,
      const std::function<std::optional<UserRecord>(std::optional<UserRecord>)>& mutate);

  std::vector<std::string> user_ids() const;

  /// Marks the user opted out at `at` and purges their counterfactual rows.
  /// Creates the user record if needed.
  void set_opted_out(std::string_view user_id, Timestamp at);

  // Recommendations ---------------------------------------------------

  /// Last-writer-wins by generated_at: the list is stored unless a list for
  /// the same (user, algorithm) with a strictly newer generated_at exists.
  /// Returns whether it was stored.
  bool put_recs(const RecommendationList& recs);
  std::optional<RecommendationList> get_recs(std::string_view user_id, std::string_view algorithm_id) const;

  // Counterfactuals ---------------------------------------------------

  /// Skipped (returns false) when the user is opted out or a record with the
  /// same key already exists.
  bool put_counterfactual(const CounterfactualRecord& record);
  std::optional<CounterfactualRecord> get_counterfactual(std::string_view user_id, std::string_view algorithm_id,
                                                        Timestamp generated_at) const;
  std::vector<CounterfactualRecord> counterfactuals_for(std::string_view user_id) const;

  // Access logs -------------------------------------------------------

  /// Append-only.
  void append_access_log(const AccessLog& log);
  std::vector<AccessLog> access_logs_for(std::string_view user_id) const;

  // Export / import ---------------------------------------------------

  /// One JSON object per line in key order; byte-identical for identical
  /// contents.
  void export_table(Table table, std::ostream& out) const;
  void import_table(Table table, std::istream& in);
  std::size_t count(Table table) const;

  /// Visits every row of a table as JSON in key order.
  void for_each_row(Table table, const std::function<void(std::string_view json)>& visit) const;

 private:
  std::unique_ptr<KvBackend> kv_;
  mutable std::shared_mutex mu_;
  std::uint64_t next_log_seq_ = 0;
};

std::unique_ptr<Store> make_memory_store();
std::unique_ptr<Store> open_file_store(const std::filesystem::path& path);

}  // namespace paperfeed::store
