#include "paperfeed/common/jsonl.hpp"

#include "paperfeed/common/errors.hpp"

namespace paperfeed {

void for_each_jsonl(std::istream& in, const std::function<void(const nlohmann::json&)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    fn(row);
  }
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  for_each_jsonl(in, fn);
}

JsonlAppender::JsonlAppender(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::app) {
  if (!out_) throw Error("cannot open " + path.string() + " for append");
}

void JsonlAppender::append(const nlohmann::json& row) {
  std::lock_guard lock(mu_);
  out_ << row.dump() << '\n';
  out_.flush();
}

}  // namespace paperfeed
