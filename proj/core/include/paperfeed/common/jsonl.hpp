#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <mutex>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace paperfeed {

/// Calls `fn` for each non-blank line of a JSON-lines stream. Parse failures
/// throw ParseError naming the 1-based line number.
void for_each_jsonl(std::istream& in, const std::function<void(const nlohmann::json&)>& fn);
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&)>& fn);

/// Thread-safe append-only JSON-lines writer.
class JsonlAppender {
 public:
  explicit JsonlAppender(const std::filesystem::path& path);
  void append(const nlohmann::json& row);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace paperfeed
