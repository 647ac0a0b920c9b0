#include "paperfeed/common/time.hpp"

#include <charconv>
#include <cstdio>

#include "paperfeed/common/errors.hpp"

namespace paperfeed {
namespace {

int read_digits(std::string_view text, std::size_t& pos, std::size_t count) {
  if (pos + count > text.size()) {
    throw ParseError("timestamp too short: '" + std::string(text) + "'");
  }
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, value);
  if (ec != std::errc{} || ptr != text.data() + pos + count) {
    throw ParseError("bad digits in timestamp: '" + std::string(text) + "'");
  }
  pos += count;
  return value;
}

void expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw ParseError("expected '" + std::string(1, c) + "' in timestamp: '" + std::string(text) + "'");
  }
  ++pos;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  std::size_t pos = 0;
  const int y = read_digits(text, pos, 4);
  expect(text, pos, '-');
  const int mo = read_digits(text, pos, 2);
  expect(text, pos, '-');
  const int d = read_digits(text, pos, 2);
  if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')) {
    throw ParseError("expected time part in timestamp: '" + std::string(text) + "'");
  }
  ++pos;
  const int h = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int mi = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int s = read_digits(text, pos, 2);

  std::int64_t frac_us = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 6) frac_us = frac_us * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw ParseError("empty fraction in timestamp: '" + std::string(text) + "'");
    for (int i = digits; i < 6; ++i) frac_us *= 10;
  }

  std::int64_t offset_s = 0;
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '-' ? -1 : 1;
    ++pos;
    const int oh = read_digits(text, pos, 2);
    expect(text, pos, ':');
    const int om = read_digits(text, pos, 2);
    offset_s = sign * (oh * 3600 + om * 60);
  } else {
    throw ParseError("timestamp lacks a UTC designator: '" + std::string(text) + "'");
  }
  if (pos != text.size()) throw ParseError("trailing characters in timestamp: '" + std::string(text) + "'");

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw ParseError("timestamp out of range: '" + std::string(text) + "'");
  }
  const auto secs = sys_days{ymd}.time_since_epoch() + hours{h} + minutes{mi} + seconds{s} - seconds{offset_s};
  return Timestamp{duration_cast<Duration>(secs) + Duration{frac_us}};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss<Duration> tod{t - day_point};
  const auto us = tod.subseconds().count();
  char buf[40];
  if (us % 1000 == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()), static_cast<long long>(us / 1000));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%06lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()), static_cast<long long>(us));
  }
  return buf;
}

Timestamp day_floor(Timestamp t) {
  return Timestamp{std::chrono::floor<std::chrono::days>(t).time_since_epoch()};
}

}  // namespace paperfeed
