#include "acceptance/oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>

namespace paperfeed::acceptance {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string escape_regex(const std::string& s) {
  static const std::string special = R"(\^$.|?*+()[]{})";
  std::string out;
  for (const char c : s) {
    if (special.find(c) != std::string::npos) out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

RuleOracle::RuleOracle(std::vector<std::string> domains, std::vector<std::string> keywords, std::size_t min_keywords)
    : domains_(std::move(domains)), keywords_(std::move(keywords)), min_keywords_(min_keywords) {
  for (auto& d : domains_) d = lower(d);
  for (auto& k : keywords_) k = lower(k);
}

bool RuleOracle::link_matches(const std::string& link) const {
  static const std::regex authority(R"(^[a-zA-Z][a-zA-Z0-9+.\-]*://(?:[^@/?#]*@)?([^/:?#]+))");
  std::smatch m;
  if (!std::regex_search(link, m, authority)) return false;
  std::string host = lower(m[1].str());
  while (!host.empty() && host.back() == '.') host.pop_back();
  for (const auto& d : domains_) {
    if (host == d) return true;
    if (host.size() > d.size() && host.ends_with("." + d)) return true;
  }
  return false;
}

std::size_t RuleOracle::keyword_hits(const std::string& text) const {
  const std::string collapsed = lower(std::regex_replace(text, std::regex(R"(\s+)"), " "));
  std::set<std::string> hits;
  for (const auto& k : keywords_) {
    const std::regex word("(^|[^a-z0-9_])" + escape_regex(k) + "([^a-z0-9_]|$)");
    if (std::regex_search(collapsed, word)) hits.insert(k);
  }
  return hits.size();
}

bool RuleOracle::is_paper(const std::string& text, std::span<const std::string> links) const {
  for (const auto& l : links) {
    if (link_matches(l)) return true;
  }
  return keyword_hits(text) >= min_keywords_;
}

std::vector<std::string> expected_served(bool consent, bool onboarding, std::span<const std::string> body,
                                         std::span<const std::string> default_feed, const std::string& consent_uri,
                                         const std::string& onboarding_uri, const std::string& follow_more_uri) {
  std::vector<std::string> out;
  if (consent) out.push_back(consent_uri);
  if (onboarding) out.push_back(onboarding_uri);
  out.insert(out.end(), body.begin(), body.end());
  if (body.size() < 10) {
    out.push_back(follow_more_uri);
    for (const auto& uri : default_feed) {
      if (std::find(body.begin(), body.end(), uri) == body.end()) out.push_back(uri);
    }
  }
  return out;
}

double planted_like_probability(int rank) { return 0.4 * std::pow(2.0, -(rank - 1) / 2.0); }

}  // namespace paperfeed::acceptance
