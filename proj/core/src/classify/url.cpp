#include "paperfeed/classify/url.hpp"

#include <cctype>

namespace paperfeed::classify {
namespace {

bool is_scheme_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

bool is_host_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

// Offset of the authority section, or npos when there is no "scheme://".
std::size_t authority_start(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::string_view::npos;
  if (!std::isalpha(static_cast<unsigned char>(url[0]))) return std::string_view::npos;
  for (std::size_t i = 0; i < sep; ++i) {
    if (!is_scheme_char(url[i])) return std::string_view::npos;
  }
  return sep + 3;
}

}  // namespace

std::optional<std::string> url_host(std::string_view url) {
  while (!url.empty() && std::isspace(static_cast<unsigned char>(url.front()))) url.remove_prefix(1);
  while (!url.empty() && std::isspace(static_cast<unsigned char>(url.back()))) url.remove_suffix(1);

  const auto start = authority_start(url);
  if (start == std::string_view::npos) return std::nullopt;
  auto authority = url.substr(start);
  authority = authority.substr(0, authority.find_first_of("/?#"));
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority.remove_prefix(at + 1);
  }
  if (!authority.empty() && authority.front() == '[') return std::nullopt;  // IPv6 literal
  if (const auto colon = authority.find(':'); colon != std::string_view::npos) {
    authority = authority.substr(0, colon);
  }

  std::string host;
  host.reserve(authority.size());
  for (char c : authority) {
    host.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty() || host.front() == '.' || host.front() == '-') return std::nullopt;
  for (char c : host) {
    if (!is_host_char(c)) return std::nullopt;
  }
  if (host.find("..") != std::string::npos) return std::nullopt;
  return host;
}

bool host_matches_domain(std::string_view host, std::string_view domain) {
  if (domain.empty() || host.size() < domain.size()) return false;
  if (host.size() == domain.size()) return host == domain;
  return host.ends_with(domain) && host[host.size() - domain.size() - 1] == '.';
}

std::string_view url_path(std::string_view url) {
  const auto start = authority_start(url);
  if (start == std::string_view::npos) return {};
  const auto slash = url.find_first_of("/?#", start);
  if (slash == std::string_view::npos || url[slash] != '/') return {};
  auto path = url.substr(slash);
  return path.substr(0, path.find_first_of("?#"));
}

}  // namespace paperfeed::classify
