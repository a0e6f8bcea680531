#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chmm/market.hpp"

namespace chmm {

// Every indicator returns a series as long as its input. Values are aligned
// to the bar that closes their window; bars before the first full window are
// quiet NaN.

/// Relative Strength Index with simple (window-local) averaging of gains and
/// losses. First value at index `period`. All-gain windows read 100, all-loss
/// windows 0 and flat windows 50.
std::vector<double> rsi(std::span<const double> closes, std::size_t period);

/// Commodity Channel Index of the typical price (high + low + close) / 3.
/// First value at index period - 1. A window with zero mean absolute
/// deviation reads 0.
std::vector<double> cci(std::span<const OhlcBar> bars, std::size_t period);

/// Trailing arithmetic mean. First value at index period - 1.
std::vector<double> sma(std::span<const double> series, std::size_t period);

/// max(high - low, |high - prev close|, |low - prev close|); the first bar
/// has no previous close and uses high - low.
std::vector<double> true_range(std::span<const OhlcBar> bars);

/// Simple average of the true range. First value at index `period`.
std::vector<double> atr(std::span<const OhlcBar> bars, std::size_t period);

/// M equal-width bins over [lb, ub].
struct Discretizer {
  double lb = 0.0;
  double ub = 100.0;
  std::size_t m = 8;

  double width() const { return (ub - lb) / static_cast<double>(m); }
};

/// Bin of x, clamped to [0, m - 1]; x == ub maps to m - 1.
std::size_t discretize(const Discretizer& d, double x);

/// Midpoint of bin k.
double bin_value(const Discretizer& d, std::size_t k);

inline Discretizer rsi_discretizer(std::size_t m = 8) { return {0.0, 100.0, m}; }
inline Discretizer cci_discretizer(std::size_t m = 8) { return {-140.0, 140.0, m}; }

}  // namespace chmm
