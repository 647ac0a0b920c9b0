#pragma once

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace paperfeed::classify {

/// Version-stripped arXiv identifiers found in the links, deduplicated in
/// first-seen order. Recognizes arxiv.org /abs/ and /pdf/ URLs (new- and
/// old-style ids), arXiv DOIs, and bare "NNNN.NNNNN[vN]" / "arXiv:..." ids.
std::vector<std::string> extract_arxiv_ids(std::span<const std::string> links);

/// Identifier -> category codes, loaded from a local snapshot.
///
/// CSV layout: `id,categories` with categories separated by spaces or ';'
/// (the arXiv metadata convention is space-separated, e.g. "cs.LG stat.ML").
/// An optional header row whose first field is "id" is skipped. The first
/// listed category is the primary one.
class ArxivCatalog {
 public:
  static ArxivCatalog load_csv(const std::filesystem::path& path);
  static ArxivCatalog parse_csv(std::istream& in);

  /// Throws ValidationError when `categories` is empty.
  void add(std::string id, std::vector<std::string> categories);

  /// nullptr for unknown ids.
  const std::vector<std::string>* categories(std::string_view id) const;

  std::size_t size() const { return entries_.size(); }

  void write_csv(std::ostream& out) const;

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

}  // namespace paperfeed::classify
