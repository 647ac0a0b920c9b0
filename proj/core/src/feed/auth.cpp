#include "paperfeed/feed/auth.hpp"

#include <array>
#include <cstdint>

#include "paperfeed/store/store.hpp"

namespace paperfeed::feed {

namespace {

constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '-' || c == '+') return 62;
  if (c == '_' || c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64url_encode(std::string_view in) {
  std::string out;
  out.reserve((in.size() * 4 + 2) / 3);
  std::uint32_t acc = 0;
  int bits = 0;
  for (unsigned char c : in) {
    acc = (acc << 8) | c;
    bits += 8;
    while (bits >= 6) {
      bits -= 6;
      out.push_back(kAlphabet[(acc >> bits) & 0x3F]);
    }
  }
  if (bits > 0) out.push_back(kAlphabet[(acc << (6 - bits)) & 0x3F]);
  return out;
}

std::optional<std::string> base64url_decode(std::string_view in) {
  while (!in.empty() && in.back() == '=') in.remove_suffix(1);
  std::string out;
  out.reserve(in.size() * 3 / 4);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : in) {
    const int v = decode_char(c);
    if (v < 0) return std::nullopt;
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xFF));
    }
  }
  if (bits >= 6) return std::nullopt;
  return out;
}

AuthContext resolve_auth(std::string_view header, const TokenValidator& validator) {
  AuthContext ctx;
  constexpr std::string_view kBearer = "Bearer ";
  if (header.size() <= kBearer.size() || header.substr(0, kBearer.size()) != kBearer) return ctx;
  ctx.raw_token = std::string(header.substr(kBearer.size()));

  const auto first = ctx.raw_token.find('.');
  if (first == std::string::npos) return ctx;
  const auto second = ctx.raw_token.find('.', first + 1);
  if (second == std::string::npos) return ctx;
  const auto payload = base64url_decode(std::string_view(ctx.raw_token).substr(first + 1, second - first - 1));
  if (!payload) return ctx;

  const auto claims = nlohmann::json::parse(*payload, nullptr, false);
  if (claims.is_discarded() || !claims.is_object()) return ctx;
  std::string user;
  for (const char* key : {"sub", "iss"}) {
    const auto it = claims.find(key);
    if (it != claims.end() && it->is_string() && !it->get<std::string>().empty()) {
      user = it->get<std::string>();
      break;
    }
  }
  if (user.empty() || user == store::kDefaultFeedUser) return ctx;
  if (validator && !validator(ctx.raw_token, claims)) return ctx;
  ctx.user_id = std::move(user);
  return ctx;
}

std::string make_unsigned_token(std::string_view subject) {
  const nlohmann::json header = {{"alg", "none"}, {"typ", "JWT"}};
  const nlohmann::json claims = {{"sub", subject}, {"iss", subject}};
  return base64url_encode(header.dump()) + "." + base64url_encode(claims.dump()) + ".";
}

}  // namespace paperfeed::feed
