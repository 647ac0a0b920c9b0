#include "paperfeed/classify/arxiv.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "paperfeed/classify/url.hpp"
#include "paperfeed/common/errors.hpp"

namespace paperfeed::classify {
namespace {

// Group 1 is the id without version.
const std::regex& abs_or_pdf_path() {
  static const std::regex re(
      R"(^/(?:abs|pdf)/((?:\d{4}\.\d{4,5})|(?:[a-z]+(?:-[a-z]+)*(?:\.[A-Z]{2})?/\d{7}))(?:v\d+)?(?:\.pdf)?/?$)");
  return re;
}

const std::regex& arxiv_doi_path() {
  static const std::regex re(R"(^/10\.48550/arxiv\.(\d{4}\.\d{4,5})(?:v\d+)?/?$)", std::regex::icase);
  return re;
}

const std::regex& bare_id() {
  static const std::regex re(R"(^(?:arxiv:)?(\d{4}\.\d{4,5})(?:v\d+)?$)", std::regex::icase);
  return re;
}

std::string trimmed(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\"");
  return std::string(s.substr(first, last - first + 1));
}

std::string strip_version(std::string id) {
  const auto v = id.rfind('v');
  if (v != std::string::npos && v + 1 < id.size() &&
      std::all_of(id.begin() + static_cast<std::ptrdiff_t>(v) + 1, id.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
      v > 0 && id[v - 1] >= '0' && id[v - 1] <= '9') {
    id.resize(v);
  }
  return id;
}

}  // namespace

std::vector<std::string> extract_arxiv_ids(std::span<const std::string> links) {
  std::vector<std::string> ids;
  auto add = [&](std::string id) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(std::move(id));
  };

  for (const auto& raw : links) {
    const std::string link = trimmed(raw);
    std::smatch m;
    if (std::regex_match(link, m, bare_id())) {
      add(m[1].str());
      continue;
    }
    const auto host = url_host(link);
    if (!host) continue;
    const std::string path(url_path(link));
    if (host_matches_domain(*host, "arxiv.org")) {
      if (std::regex_match(path, m, abs_or_pdf_path())) add(m[1].str());
    } else if (host_matches_domain(*host, "doi.org")) {
      if (std::regex_match(path, m, arxiv_doi_path())) add(m[1].str());
    }
  }
  return ids;
}

ArxivCatalog ArxivCatalog::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open arXiv catalog " + path.string());
  return parse_csv(in);
}

ArxivCatalog ArxivCatalog::parse_csv(std::istream& in) {
  ArxivCatalog catalog;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("arXiv catalog line " + std::to_string(line_no) + ": missing ','");
    }
    std::string id = trimmed(std::string_view(line).substr(0, comma));
    if (line_no == 1 && id == "id") continue;
    std::string rest = trimmed(std::string_view(line).substr(comma + 1));
    std::replace(rest.begin(), rest.end(), ';', ' ');
    std::vector<std::string> categories;
    std::istringstream fields(rest);
    for (std::string cat; fields >> cat;) categories.push_back(cat);
    if (categories.empty()) {
      throw ValidationError("arXiv catalog line " + std::to_string(line_no) + ": id '" + id +
                            "' has no categories");
    }
    catalog.add(strip_version(std::move(id)), std::move(categories));
  }
  return catalog;
}

void ArxivCatalog::add(std::string id, std::vector<std::string> categories) {
  if (categories.empty()) throw ValidationError("arXiv id '" + id + "' must map to at least one category");
  entries_[std::move(id)] = std::move(categories);
}

const std::vector<std::string>* ArxivCatalog::categories(std::string_view id) const {
  const auto it = entries_.find(std::string(id));
  return it == entries_.end() ? nullptr : &it->second;
}

void ArxivCatalog::write_csv(std::ostream& out) const {
  std::vector<const std::pair<const std::string, std::vector<std::string>>*> rows;
  rows.reserve(entries_.size());
  for (const auto& entry : entries_) rows.push_back(&entry);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
  out << "id,categories\n";
  for (const auto* row : rows) {
    out << row->first << ',';
    for (std::size_t i = 0; i < row->second.size(); ++i) out << (i ? " " : "") << row->second[i];
    out << '\n';
  }
}

}  // namespace paperfeed::classify
