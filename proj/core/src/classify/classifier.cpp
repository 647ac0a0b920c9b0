#include "paperfeed/classify/classifier.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "paperfeed/classify/arxiv.hpp"
#include "paperfeed/classify/url.hpp"
#include "paperfeed/common/errors.hpp"

namespace paperfeed::classify {
namespace {

constexpr std::array kDefaultDomains = {
    "arxiv.org",     "doi.org",  "biorxiv.org", "medrxiv.org",       "ssrn.com",
    "nature.com",    "sciencedirect.com",       "springer.com",      "wiley.com",
    "nber.org",      "osf.io",   "acm.org",     "aclanthology.org", "pnas.org",
    "plos.org",
};

constexpr std::array kDefaultKeywords = {
    "new paper",    "preprint",     "excited",       "accepted",       "to appear",
    "we show",      "our paper",    "camera-ready",  "working paper",  "journal",
    "published",    "publication",  "peer-reviewed", "manuscript",     "findings",
    "we find",      "our study",    "new study",     "our work",       "co-authors",
    "first author", "proceedings",  "forthcoming",   "out now",        "in press",
    "open access",  "we propose",   "our results",   "paper thread",   "supplementary",
};

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9') || u == '_';
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

bool contains_whole_word(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    const bool left_ok = pos == 0 || !is_word_byte(haystack[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right_ok = end == haystack.size() || !is_word_byte(haystack[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

ClassifierConfig ClassifierConfig::defaults() {
  ClassifierConfig config;
  config.domains.assign(kDefaultDomains.begin(), kDefaultDomains.end());
  config.keywords.assign(kDefaultKeywords.begin(), kDefaultKeywords.end());
  return config;
}

ClassifierConfig ClassifierConfig::load(const std::filesystem::path& domains_file,
                                        const std::filesystem::path& keywords_file) {
  ClassifierConfig config;
  config.domains = read_list_file(domains_file);
  config.keywords = read_list_file(keywords_file);
  return config;
}

std::vector<std::string> read_list_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open list file " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    auto entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    entries.push_back(normalize_text(entry));
  }
  return entries;
}

PaperClassifier::PaperClassifier(ClassifierConfig config) : config_(std::move(config)) {
  for (auto& domain : config_.domains) domain = normalize_text(trim(domain));
  normalized_keywords_.reserve(config_.keywords.size());
  for (const auto& keyword : config_.keywords) normalized_keywords_.push_back(normalize_text(trim(keyword)));
}

std::vector<std::string> PaperClassifier::match_domains(std::span<const std::string> links) const {
  std::vector<std::string> hosts;
  for (const auto& link : links) {
    if (auto host = url_host(link)) hosts.push_back(std::move(*host));
  }
  std::vector<std::string> matched;
  for (const auto& domain : config_.domains) {
    const bool hit = std::any_of(hosts.begin(), hosts.end(),
                                 [&](const std::string& h) { return host_matches_domain(h, domain); });
    if (hit && std::find(matched.begin(), matched.end(), domain) == matched.end()) matched.push_back(domain);
  }
  return matched;
}

std::vector<std::string> PaperClassifier::match_keywords(std::string_view text) const {
  const std::string normalized = normalize_text(text);
  std::vector<std::string> matched;
  for (const auto& keyword : normalized_keywords_) {
    if (!contains_whole_word(normalized, keyword)) continue;
    if (std::find(matched.begin(), matched.end(), keyword) == matched.end()) matched.push_back(keyword);
  }
  return matched;
}

ClassificationResult PaperClassifier::classify(std::string_view text,
                                               std::span<const std::string> links) const {
  ClassificationResult result;
  result.matched_domains = match_domains(links);
  result.matched_keywords = match_keywords(text);
  result.arxiv_ids = extract_arxiv_ids(links);
  result.is_paper = !result.matched_domains.empty() || result.matched_keywords.size() >= config_.min_keywords;
  return result;
}

}  // namespace paperfeed::classify
