#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "chmm/error.hpp"
#include "chmm/indicators.hpp"
#include "test_support.hpp"

using namespace chmm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<OhlcBar> flat_bars(std::span<const double> typical) {
  std::vector<OhlcBar> bars;
  for (double v : typical) bars.push_back({Timestamp{}, v, v, v, v});
  return bars;
}

std::vector<double> closes_of(const std::vector<OhlcBar>& bars) {
  std::vector<double> out;
  for (const auto& b : bars) out.push_back(b.close);
  return out;
}

}  // namespace

TEST_CASE("RSI of monotone closes") {
  const std::vector<double> up{1, 2, 3, 4, 5, 6};
  const std::vector<double> down{6, 5, 4, 3, 2, 1};
  const auto r_up = rsi(up, 4);
  const auto r_down = rsi(down, 4);
  for (std::size_t t = 0; t < 4; ++t) CHECK(std::isnan(r_up[t]));
  CHECK(r_up[4] == 100.0);
  CHECK(r_up[5] == 100.0);
  CHECK(r_down[4] == 0.0);
  CHECK(r_down[5] == 0.0);
}

TEST_CASE("RSI of an alternating series is 50") {
  const std::vector<double> closes{1, 2, 1, 2, 1};
  CHECK_THAT(rsi(closes, 4)[4], WithinAbs(50.0, 1e-12));
}

TEST_CASE("RSI needs period + 1 closes") {
  const std::vector<double> closes{1, 2, 3, 4};
  CHECK_THROWS_AS(rsi(closes, 4), InsufficientDataError);
  CHECK_THROWS_AS(rsi(closes, 0), Error);
}

TEST_CASE("RSI stays within [0, 100]") {
  const auto closes = closes_of(test::random_walk_bars(400, 3));
  for (double v : rsi(closes, 4)) {
    if (std::isnan(v)) continue;
    CHECK(v >= 0.0);
    CHECK(v <= 100.0);
  }
}

TEST_CASE("CCI of constant bars is zero") {
  const std::vector<double> tp(6, 3.25);
  const auto out = cci(flat_bars(tp), 4);
  CHECK(std::isnan(out[2]));
  for (std::size_t t = 3; t < 6; ++t) CHECK(out[t] == 0.0);
}

TEST_CASE("CCI hand example") {
  const std::vector<double> tp{1, 1, 1, 2};
  CHECK_THAT(cci(flat_bars(tp), 4)[3], WithinRel(400.0 / 3.0, 1e-12));
}

TEST_CASE("CCI flips sign when prices are mirrored") {
  const auto bars = test::random_walk_bars(120, 8);
  std::vector<OhlcBar> mirrored;
  for (const auto& b : bars) mirrored.push_back({b.timestamp, -b.open, -b.low, -b.high, -b.close});
  const auto a = cci(bars, 10);
  const auto b = cci(mirrored, 10);
  for (std::size_t t = 9; t < bars.size(); ++t) CHECK_THAT(b[t], WithinAbs(-a[t], 1e-9));
}

TEST_CASE("SMA examples") {
  const std::vector<double> constant(5, 7.5);
  const auto smoothed = sma(constant, 3);
  for (std::size_t t = 2; t < 5; ++t) CHECK(smoothed[t] == 7.5);
  const std::vector<double> pair{0, 100};
  CHECK(sma(pair, 2)[1] == 50.0);
  const std::vector<double> series{3, -1, 4, 1, -5};
  CHECK(sma(series, 1) == series);
}

TEST_CASE("SMA is shift equivariant and bounded by its window") {
  const auto closes = closes_of(test::random_walk_bars(100, 4));
  std::vector<double> shifted(closes);
  for (double& v : shifted) v += 2.0;
  const auto a = sma(closes, 5);
  const auto b = sma(shifted, 5);
  for (std::size_t t = 4; t < closes.size(); ++t) {
    CHECK_THAT(b[t], WithinAbs(a[t] + 2.0, 1e-12));
    const auto lo = *std::min_element(closes.begin() + t - 4, closes.begin() + t + 1);
    const auto hi = *std::max_element(closes.begin() + t - 4, closes.begin() + t + 1);
    CHECK(a[t] >= lo - 1e-12);
    CHECK(a[t] <= hi + 1e-12);
  }
}

TEST_CASE("ATR of a constant range without gaps") {
  std::vector<OhlcBar> bars;
  for (int k = 0; k < 8; ++k) bars.push_back({Timestamp{}, 10.0, 10.5, 9.75, 10.0});
  const auto out = atr(bars, 4);
  for (std::size_t t = 4; t < 8; ++t) CHECK(out[t] == 0.75);
}

TEST_CASE("true range includes the gap from the previous close") {
  const std::vector<OhlcBar> bars{{Timestamp{}, 10, 10, 10, 10}, {Timestamp{}, 11, 11, 11, 11}};
  CHECK(true_range(bars)[1] == 1.0);
}

TEST_CASE("ATR averages the last period true ranges") {
  // True ranges 1, 2, 3, 4 on bars 1..4, each bar opening at the prior close.
  std::vector<OhlcBar> bars{{Timestamp{}, 10, 10, 10, 10}};
  double close = 10.0;
  for (double r : {1.0, 2.0, 3.0, 4.0}) {
    bars.push_back({Timestamp{}, close, close + r, close, close + r});
    close += r;
  }
  CHECK(atr(bars, 4)[4] == 2.5);
  for (double v : atr(test::random_walk_bars(50, 2), 6)) {
    if (!std::isnan(v)) CHECK(v >= 0.0);
  }
}

TEST_CASE("discretize examples") {
  const Discretizer quarters{0.0, 100.0, 4};
  CHECK(discretize(quarters, 30.0) == 1);
  CHECK(discretize(quarters, 100.0) == 3);
  CHECK(discretize(quarters, 0.0) == 0);
  CHECK(discretize(quarters, -5.0) == 0);
  CHECK(discretize(quarters, 250.0) == 3);
  CHECK(discretize(cci_discretizer(8), 0.0) == 4);
  CHECK_THROWS_AS(discretize(quarters, std::nan("")), Error);
}

TEST_CASE("bin midpoints") {
  CHECK(bin_value(rsi_discretizer(8), 0) == 6.25);
  CHECK(bin_value(rsi_discretizer(8), 7) == 93.75);
  CHECK(bin_value(cci_discretizer(8), 4) == 17.5);
  CHECK_THROWS_AS(bin_value(rsi_discretizer(8), 8), IndexError);
}

TEST_CASE("discretize inverts bin_value and is monotone") {
  for (const auto& d : {rsi_discretizer(8), cci_discretizer(8), Discretizer{-1.0, 3.0, 5}}) {
    for (std::size_t k = 0; k < d.m; ++k) CHECK(discretize(d, bin_value(d, k)) == k);
    std::size_t prev = 0;
    for (double x = d.lb - 10.0; x <= d.ub + 10.0; x += 0.37) {
      const std::size_t k = discretize(d, x);
      CHECK(k >= prev);
      prev = k;
    }
  }
}
