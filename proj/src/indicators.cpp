#include "chmm/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chmm/error.hpp"

namespace chmm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_period(std::size_t period) {
  if (period == 0) throw Error("indicator period must be positive");
}

void require_length(std::size_t have, std::size_t need, const char* name) {
  if (have < need) {
    throw InsufficientDataError(std::string(name) + " needs at least " + std::to_string(need) +
                                " values, got " + std::to_string(have));
  }
}

}  // namespace

std::vector<double> rsi(std::span<const double> closes, std::size_t period) {
  require_period(period);
  require_length(closes.size(), period + 1, "rsi");
  std::vector<double> out(closes.size(), kNaN);
  for (std::size_t t = period; t < closes.size(); ++t) {
    double gains = 0.0;
    double losses = 0.0;
    for (std::size_t s = t + 1 - period; s <= t; ++s) {
      const double diff = closes[s] - closes[s - 1];
      if (diff > 0.0) {
        gains += diff;
      } else {
        losses -= diff;
      }
    }
    if (gains == 0.0 && losses == 0.0) {
      out[t] = 50.0;
    } else if (losses == 0.0) {
      out[t] = 100.0;
    } else if (gains == 0.0) {
      out[t] = 0.0;
    } else {
      out[t] = 100.0 - 100.0 / (1.0 + gains / losses);
    }
  }
  return out;
}

std::vector<double> cci(std::span<const OhlcBar> bars, std::size_t period) {
  require_period(period);
  require_length(bars.size(), period, "cci");
  std::vector<double> typical(bars.size());
  std::transform(bars.begin(), bars.end(), typical.begin(),
                 [](const OhlcBar& b) { return (b.high + b.low + b.close) / 3.0; });

  std::vector<double> out(bars.size(), kNaN);
  const double n = static_cast<double>(period);
  for (std::size_t t = period - 1; t < bars.size(); ++t) {
    const auto window = std::span(typical).subspan(t + 1 - period, period);
    double mean = 0.0;
    for (double v : window) mean += v;
    mean /= n;
    double mad = 0.0;
    for (double v : window) mad += std::abs(v - mean);
    mad /= n;
    // Equal typical prices can leave a rounding-level deviation; treat it as zero.
    out[t] = mad <= 1e-12 * std::max(1.0, std::abs(mean)) ? 0.0
                                                           : (typical[t] - mean) / (0.015 * mad);
  }
  return out;
}

std::vector<double> sma(std::span<const double> series, std::size_t period) {
  require_period(period);
  require_length(series.size(), period, "sma");
  std::vector<double> out(series.size(), kNaN);
  for (std::size_t t = period - 1; t < series.size(); ++t) {
    double sum = 0.0;
    for (std::size_t s = t + 1 - period; s <= t; ++s) sum += series[s];
    out[t] = sum / static_cast<double>(period);
  }
  return out;
}

std::vector<double> true_range(std::span<const OhlcBar> bars) {
  std::vector<double> out(bars.size());
  for (std::size_t t = 0; t < bars.size(); ++t) {
    double range = bars[t].high - bars[t].low;
    if (t > 0) {
      const double prev = bars[t - 1].close;
      range = std::max({range, std::abs(bars[t].high - prev), std::abs(bars[t].low - prev)});
    }
    out[t] = range;
  }
  return out;
}

std::vector<double> atr(std::span<const OhlcBar> bars, std::size_t period) {
  require_period(period);
  require_length(bars.size(), period + 1, "atr");
  const std::vector<double> tr = true_range(bars);
  std::vector<double> out(bars.size(), kNaN);
  for (std::size_t t = period; t < bars.size(); ++t) {
    double sum = 0.0;
    for (std::size_t s = t + 1 - period; s <= t; ++s) sum += tr[s];
    out[t] = sum / static_cast<double>(period);
  }
  return out;
}

std::size_t discretize(const Discretizer& d, double x) {
  if (!(d.lb < d.ub) || d.m == 0) throw Error("discretizer needs lb < ub and m >= 1");
  if (std::isnan(x)) throw Error("cannot discretize NaN");
  const double pos = std::floor((x - d.lb) / d.width());
  if (pos <= 0.0) return 0;
  const double last = static_cast<double>(d.m - 1);
  return pos >= last ? d.m - 1 : static_cast<std::size_t>(pos);
}

double bin_value(const Discretizer& d, std::size_t k) {
  if (k >= d.m) throw IndexError("bin " + std::to_string(k) + " out of range");
  return d.lb + (static_cast<double>(k) + 0.5) * d.width();
}

}  // namespace chmm
