#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace chmm {

using Timestamp = std::chrono::sys_seconds;

struct OhlcBar {
  Timestamp timestamp{};
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;

  bool operator==(const OhlcBar&) const = default;
};

/// low <= min(open, close) <= max(open, close) <= high, all finite.
bool is_consistent(const OhlcBar& bar);

/// Parses "YYYY-MM-DDTHH:MM:SS" with an optional trailing 'Z' (a space is
/// accepted in place of 'T'). Throws chmm::ParseError.
Timestamp parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp ts);

}  // namespace chmm
