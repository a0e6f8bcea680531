#include "chmm/market.hpp"

#include <cmath>
#include <cstdio>

#include "chmm/error.hpp"

namespace chmm {

bool is_consistent(const OhlcBar& bar) {
  if (!std::isfinite(bar.open) || !std::isfinite(bar.high) || !std::isfinite(bar.low) ||
      !std::isfinite(bar.close)) {
    return false;
  }
  return bar.low <= std::min(bar.open, bar.close) && std::max(bar.open, bar.close) <= bar.high;
}

Timestamp parse_timestamp(std::string_view text) {
  auto digits = [&](std::size_t pos, std::size_t count) -> int {
    if (pos + count > text.size()) throw ParseError("timestamp too short: '" + std::string(text) + "'");
    int value = 0;
    for (std::size_t k = pos; k < pos + count; ++k) {
      const char ch = text[k];
      if (ch < '0' || ch > '9') {
        throw ParseError("malformed timestamp '" + std::string(text) + "'");
      }
      value = value * 10 + (ch - '0');
    }
    return value;
  };
  auto expect = [&](std::size_t pos, std::string_view allowed) {
    if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
      throw ParseError("malformed timestamp '" + std::string(text) + "'");
    }
  };

  const int year = digits(0, 4);
  expect(4, "-");
  const int month = digits(5, 2);
  expect(7, "-");
  const int day = digits(8, 2);
  expect(10, "T ");
  const int hour = digits(11, 2);
  expect(13, ":");
  const int minute = digits(14, 2);
  expect(16, ":");
  const int second = digits(17, 2);
  if (text.size() > 19 && !(text.size() == 20 && text[19] == 'Z')) {
    throw ParseError("unsupported timestamp suffix in '" + std::string(text) + "'");
  }

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) {
    throw ParseError("invalid calendar time '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{ts - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace chmm
