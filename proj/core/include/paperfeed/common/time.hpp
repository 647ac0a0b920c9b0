#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace paperfeed {

using Duration = std::chrono::microseconds;
using Timestamp = std::chrono::sys_time<Duration>;

inline std::int64_t to_micros(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_micros(std::int64_t us) { return Timestamp{Duration{us}}; }

/// Parses RFC 3339 / ISO-8601 UTC timestamps such as
/// "2025-03-01T12:00:00Z", "2025-03-01T12:00:00.123Z" or
/// "2025-03-01T07:00:00-05:00". Fractions beyond microseconds are truncated.
/// Throws ParseError.
Timestamp parse_timestamp(std::string_view text);

/// Canonical form: millisecond fraction when the sub-millisecond part is
/// zero, microsecond fraction otherwise. Always UTC with a trailing 'Z'.
/// parse_timestamp(format_timestamp(t)) == t for every t.
std::string format_timestamp(Timestamp t);

/// Midnight UTC of the day containing t.
Timestamp day_floor(Timestamp t);

}  // namespace paperfeed
