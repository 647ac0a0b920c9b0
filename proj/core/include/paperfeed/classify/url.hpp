#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace paperfeed::classify {

/// Lower-cased host of an absolute URL ("scheme://host[:port]/..."), with
/// userinfo, port and any trailing dot removed. nullopt for anything that is
/// not an absolute URL with a plausible DNS host.
std::optional<std::string> url_host(std::string_view url);

/// True when `host` equals `domain` or is a subdomain of it. Both arguments
/// are expected lower-case.
bool host_matches_domain(std::string_view host, std::string_view domain);

/// Path component (starting with '/') of an absolute URL, or "" if absent.
std::string_view url_path(std::string_view url);

}  // namespace paperfeed::classify
