#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace paperfeed::classify {

struct ClassificationResult {
  bool is_paper = false;
  std::vector<std::string> matched_domains;
  std::vector<std::string> matched_keywords;
  std::vector<std::string> arxiv_ids;

  bool operator==(const ClassificationResult&) const = default;
};

struct ClassifierConfig {
  std::vector<std::string> domains;
  std::vector<std::string> keywords;
  std::size_t min_keywords = 3;

  /// The built-in lists; config/domains.txt and config/keywords.txt ship the
  /// same contents.
  static ClassifierConfig defaults();

  static ClassifierConfig load(const std::filesystem::path& domains_file,
                               const std::filesystem::path& keywords_file);
};

/// One entry per line; blank lines and lines starting with '#' are skipped;
/// entries are trimmed and lower-cased.
std::vector<std::string> read_list_file(const std::filesystem::path& path);

/// Decides whether a post is about an academic paper: it links to an
/// allowlisted host (subdomains included) or mentions at least
/// `min_keywords` distinct keywords as whole words. Pure and thread-safe.
class PaperClassifier {
 public:
  explicit PaperClassifier(ClassifierConfig config = ClassifierConfig::defaults());

  ClassificationResult classify(std::string_view text, std::span<const std::string> links) const;

  /// Allowlist entries matched by at least one link, in allowlist order.
  std::vector<std::string> match_domains(std::span<const std::string> links) const;

  /// Distinct keywords present in the text, in keyword-list order.
  std::vector<std::string> match_keywords(std::string_view text) const;

  const ClassifierConfig& config() const { return config_; }

 private:
  ClassifierConfig config_;
  std::vector<std::string> normalized_keywords_;
};

/// Lower-cases ASCII and collapses whitespace runs to one space.
std::string normalize_text(std::string_view text);

}  // namespace paperfeed::classify
