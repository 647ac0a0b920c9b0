#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paperfeed::store {

/// A group of puts and erases applied atomically.
class WriteBatch {
 public:
  struct Op {
    bool erase = false;
    std::string key;
    std::string value;
  };

  void put(std::string key, std::string value) { ops_.push_back({false, std::move(key), std::move(value)}); }
  void erase(std::string key) { ops_.push_back({true, std::move(key), {}}); }

  const std::vector<Op>& ops() const { return ops_; }
  bool empty() const { return ops_.empty(); }

 private:
  std::vector<Op> ops_;
};

/// Visitor for ordered scans; return false to stop.
using ScanVisitor = std::function<bool(std::string_view key, std::string_view value)>;

/// Ordered byte-string key-value storage. Implementations need not be
/// thread-safe; Store serializes access. Failures throw StoreUnavailable.
class KvBackend {
 public:
  virtual ~KvBackend() = default;

  virtual std::optional<std::string> get(std::string_view key) const = 0;
  virtual void apply(const WriteBatch& batch) = 0;

  /// Visits keys starting with `prefix` in ascending byte order.
  virtual void scan(std::string_view prefix, const ScanVisitor& visit) const = 0;

  /// Visits keys starting with `prefix` in descending byte order.
  virtual void scan_reverse(std::string_view prefix, const ScanVisitor& visit) const = 0;
};

/// std::map-backed storage for tests and ephemeral runs.
class MemoryKv : public KvBackend {
 public:
  std::optional<std::string> get(std::string_view key) const override;
  void apply(const WriteBatch& batch) override;
  void scan(std::string_view prefix, const ScanVisitor& visit) const override;
  void scan_reverse(std::string_view prefix, const ScanVisitor& visit) const override;

  std::size_t size() const { return map_.size(); }

 protected:
  std::map<std::string, std::string, std::less<>> map_;
};

/// File-backed storage: an in-memory ordered map rebuilt on open from an
/// append-only log of checksummed write batches. A torn trailing batch (from
/// a crash mid-write) is discarded on open.
class FileKv : public MemoryKv {
 public:
  explicit FileKv(std::filesystem::path path);

  void apply(const WriteBatch& batch) override;

  /// Rewrites the log as a single snapshot batch.
  void compact();

  const std::filesystem::path& path() const { return path_; }

 private:
  void replay();

  std::filesystem::path path_;
  std::ofstream log_;
};

}  // namespace paperfeed::store
