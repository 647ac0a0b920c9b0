#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace paperfeed::feed {

struct AuthContext {
  std::string raw_token;
  /// Absent for logged-out requests.
  std::optional<std::string> user_id;
};

/// Optional signature check. Receives the raw token and its decoded claims;
/// returning false makes the request logged-out.
using TokenValidator = std::function<bool(const std::string& token, const nlohmann::json& claims)>;

/// Resolves an `Authorization` header value ("Bearer <jwt>"). The user id is
/// the token's `sub` claim, or `iss` when `sub` is missing. Anything
/// malformed resolves to a logged-out context; so does the reserved
/// default-feed key.
AuthContext resolve_auth(std::string_view authorization_header, const TokenValidator& validator = {});

/// Unsigned JWT ("alg": "none") carrying `sub` and `iss` = subject. Used by
/// the harness and tests to act as a given user.
std::string make_unsigned_token(std::string_view subject);

std::optional<std::string> base64url_decode(std::string_view in);
std::string base64url_encode(std::string_view in);

}  // namespace paperfeed::feed
