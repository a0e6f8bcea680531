#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chmm/backtest.hpp"
#include "chmm/error.hpp"
#include "chmm/oracle.hpp"
#include "test_support.hpp"

using namespace chmm;
using Catch::Matchers::WithinAbs;

namespace {

BacktestConfig baseline_rsi() {
  BacktestConfig cfg;
  cfg.predictor = Predictor::kBaseline;
  return cfg;
}

// Two coupled synthetic assets sampled from a peaked model.
std::pair<std::vector<OhlcBar>, std::vector<OhlcBar>> synthetic_pair(std::size_t n, std::uint64_t seed) {
  const auto truth = test::recovery_truth();
  const auto s = oracle::sample_chmm(truth, n, seed);
  oracle::SyntheticMarketConfig market;
  market.noise = 0.004;
  return {oracle::synthetic_bars(s.states[0], 2, market, seed + 1),
          oracle::synthetic_bars(s.states[1], 2, market, seed + 2)};
}

void check_trade_geometry(const BacktestConfig& cfg, const BacktestResult& r) {
  for (const auto& t : r.trades) {
    const double dir = t.side == Side::kLong ? 1.0 : -1.0;
    const double risk = dir * (t.entry_price - t.stop_price);
    const double reward = dir * (t.target_price - t.entry_price);
    CHECK(risk > 0.0);
    CHECK_THAT(reward, WithinAbs(risk * cfg.target_multiple / cfg.stop_multiple, 1e-9 * std::abs(t.entry_price)));
    CHECK(t.exit_time > t.entry_time);
    if (t.exit_reason == ExitReason::kStop) CHECK(t.exit_price == t.stop_price);
    if (t.exit_reason == ExitReason::kTarget) CHECK(t.exit_price == t.target_price);
    CHECK_THAT(t.pnl, WithinAbs(dir * (t.exit_price - t.entry_price) * t.size, 1e-9));
  }
}

void check_accounting(const BacktestConfig& cfg, const BacktestResult& r) {
  double total = 0.0;
  for (const auto& t : r.trades) total += t.pnl;
  CHECK_THAT(r.equity.back().equity - cfg.initial_capital, WithinAbs(total, 1e-9 * cfg.initial_capital));
}

// Everything decided or completed by bar `cut` must survive a change of later bars.
void check_prefix_equal(const BacktestResult& a, const BacktestResult& b, Timestamp cut_ts, Timestamp next_ts) {
  auto signals_before = [&](const BacktestResult& r) {
    std::vector<std::pair<Timestamp, Side>> out;
    for (const auto& s : r.signals) {
      if (s.timestamp <= cut_ts) out.emplace_back(s.timestamp, s.side);
    }
    return out;
  };
  CHECK(signals_before(a) == signals_before(b));
  auto diags_before = [&](const BacktestResult& r) {
    std::vector<BarDiagnostics> out;
    for (const auto& d : r.diagnostics) {
      if (d.timestamp <= cut_ts) out.push_back(d);
    }
    return out;
  };
  CHECK(diags_before(a) == diags_before(b));
  auto closed_before = [&](const BacktestResult& r) {
    std::vector<TradeRecord> out;
    for (const auto& t : r.trades) {
      if (t.exit_reason != ExitReason::kEndOfData && t.exit_time <= next_ts) out.push_back(t);
    }
    return out;
  };
  CHECK(closed_before(a) == closed_before(b));
  for (std::size_t k = 0; k < a.equity.size() && a.equity[k].timestamp < cut_ts; ++k) {
    CHECK(a.equity[k] == b.equity[k]);
  }
}

}  // namespace

TEST_CASE("ratio and delta examples") {
  CHECK_THAT(ratio_stats(-4.55, 5.18, 0.0).ratio, WithinAbs(-0.878, 0.0005));
  const auto viterbi = ratio_stats(5.51, 6.88, -4.55 / 5.18);
  CHECK_THAT(viterbi.ratio, WithinAbs(0.801, 0.0005));
  CHECK_THAT(viterbi.delta_ratio, WithinAbs(1.679, 0.0005));
  CHECK_THAT(ratio_stats(0.37, 0.81, 0.0).ratio, WithinAbs(0.457, 0.0005));
  CHECK_THROWS_AS(ratio_stats(1.0, 0.0, 0.0), Error);
}

TEST_CASE("perf_stats of an equity curve") {
  const Timestamp t0{};
  const EquityCurve curve{{t0, 100.0}, {t0 + std::chrono::seconds{1}, 110.0}, {t0 + std::chrono::seconds{2}, 99.0}};
  const auto s = perf_stats(curve, 0.5);
  CHECK_THAT(s.ret, WithinAbs(-1.0, 1e-12));
  // Per-bar returns +10% and -10%: population sd 10, times sqrt(2).
  CHECK_THAT(s.vol, WithinAbs(10.0 * std::sqrt(2.0), 1e-9));
  CHECK_THAT(s.delta_ratio, WithinAbs(s.ratio - 0.5, 1e-15));
  CHECK_THROWS_AS(perf_stats(EquityCurve{{t0, 1.0}}), InsufficientDataError);
  CHECK_THROWS_AS(perf_stats(EquityCurve{{t0, 1.0}, {t0 + std::chrono::seconds{1}, 1.0}}), Error);
}

TEST_CASE("flat prices produce no trades") {
  std::vector<OhlcBar> bars = test::random_walk_bars(60, 1);
  for (auto& b : bars) b.open = b.high = b.low = b.close = 5.0;
  for (auto predictor : {Predictor::kBaseline, Predictor::kMarginal}) {
    auto cfg = baseline_rsi();
    cfg.predictor = predictor;
    const auto r = run_backtest(cfg, bars, bars);
    CHECK(r.trades.empty());
    CHECK(r.equity.size() == bars.size());
    CHECK(r.equity.back().equity == cfg.initial_capital);
    CHECK_FALSE(r.stats);
  }
}

TEST_CASE("the one-trade fixture closes one long at its target") {
  const auto bars = test::one_trade_fixture();
  const auto cfg = baseline_rsi();
  const auto r = run_backtest(cfg, bars, bars);
  REQUIRE(r.trades.size() == 1);
  const auto& t = r.trades[0];
  CHECK(t.side == Side::kLong);
  CHECK(t.exit_reason == ExitReason::kTarget);
  CHECK(t.entry_time == bars[test::kFixtureEntryBar].timestamp);
  CHECK(t.entry_price == bars[test::kFixtureSignalBar].close);
  CHECK(t.target_price - t.entry_price == 6.0 * test::kFixtureAtr);
  CHECK(t.entry_price - t.stop_price == 2.0 * test::kFixtureAtr);
  CHECK(t.pnl == 6.0 * test::kFixtureAtr * cfg.notional);
  CHECK(t.exit_time == bars[25].timestamp);
  REQUIRE(r.signals.size() == 1);
  CHECK(r.signals[0].timestamp == bars[test::kFixtureSignalBar].timestamp);
  check_accounting(cfg, r);
}

TEST_CASE("changing future bars never changes past decisions") {
  const auto [a1, a2] = synthetic_pair(260, 3);
  for (auto predictor : {Predictor::kBaseline, Predictor::kMarginal, Predictor::kViterbi}) {
    BacktestConfig cfg;
    cfg.predictor = predictor;
    const auto full = run_backtest(cfg, a1, a2);
    for (std::size_t cut : {60u, 150u, 230u}) {
      auto b1 = a1;
      auto b2 = a2;
      const auto noise1 = test::random_walk_bars(a1.size(), 900 + cut, a1[cut].close);
      const auto noise2 = test::random_walk_bars(a2.size(), 950 + cut, a2[cut].close);
      for (std::size_t t = cut + 1; t < a1.size(); ++t) {
        b1[t] = noise1[t];
        b2[t] = noise2[t];
        b1[t].timestamp = a1[t].timestamp;
        b2[t].timestamp = a2[t].timestamp;
      }
      const auto perturbed = run_backtest(cfg, b1, b2);
      check_prefix_equal(full, perturbed, a1[cut].timestamp, a1[cut + 1].timestamp);
    }
  }
}

TEST_CASE("trades satisfy the bracket geometry and the books balance") {
  const auto [a1, a2] = synthetic_pair(400, 5);
  for (auto system : {System::kRsi, System::kCci}) {
    for (auto predictor : {Predictor::kBaseline, Predictor::kMarginal, Predictor::kViterbi}) {
      auto cfg = BacktestConfig::defaults_for(system);
      cfg.predictor = predictor;
      cfg.dynamic_allocation = predictor != Predictor::kBaseline;
      const auto r = run_backtest(cfg, a1, a2);
      check_trade_geometry(cfg, r);
      check_accounting(cfg, r);
      CHECK(r.equity.size() == a1.size());
      if (predictor != Predictor::kBaseline) {
        CHECK(r.diagnostics.size() == r.fits.size());
        CHECK_FALSE(r.fits.empty());
        for (const auto& t : r.trades) {
          CHECK(t.size > 0.0);
          CHECK(t.size <= cfg.notional);
        }
      }
    }
  }
}

TEST_CASE("backtests are bit reproducible") {
  const auto [a1, a2] = synthetic_pair(300, 7);
  BacktestConfig cfg;
  cfg.predictor = Predictor::kViterbi;
  const auto x = run_backtest(cfg, a1, a2);
  const auto y = run_backtest(cfg, a1, a2);
  CHECK(x.trades == y.trades);
  CHECK(x.equity == y.equity);
  CHECK(x.diagnostics == y.diagnostics);
  cfg.predictor = Predictor::kBaseline;
  CHECK(run_backtest(cfg, a1, a2).trades == run_backtest(cfg, a1, a2).trades);
}

TEST_CASE("at most one position per direction is open") {
  const auto [a1, a2] = synthetic_pair(500, 11);
  BacktestConfig cfg;
  cfg.predictor = Predictor::kBaseline;
  const auto r = run_backtest(cfg, a1, a2);
  for (std::size_t i = 0; i < r.trades.size(); ++i) {
    for (std::size_t j = i + 1; j < r.trades.size(); ++j) {
      if (r.trades[i].side != r.trades[j].side) continue;
      const bool overlap = r.trades[j].entry_time < r.trades[i].exit_time &&
                           r.trades[i].entry_time < r.trades[j].exit_time;
      CHECK_FALSE(overlap);
    }
  }
}

TEST_CASE("input validation") {
  const auto bars = test::random_walk_bars(40, 1);
  auto other = bars;
  other[5].timestamp += std::chrono::seconds{1};
  CHECK_THROWS_AS(run_backtest(baseline_rsi(), bars, other), Error);
  const std::vector<OhlcBar> few(bars.begin(), bars.begin() + 12);
  CHECK_THROWS_AS(run_backtest(baseline_rsi(), few, few), InsufficientDataError);
  auto cfg = baseline_rsi();
  cfg.target_multiple = 1.0;
  CHECK_THROWS_AS(run_backtest(cfg, bars, bars), Error);
  CHECK(warmup_bars(BacktestConfig{}) == 12);
  CHECK(warmup_bars(BacktestConfig::defaults_for(System::kCci)) == 24);
}

TEST_CASE("compare reports full agreement on an absorbing model") {
  const auto [a1, a2] = synthetic_pair(120, 13);
  auto p = ChmmParams::uniform(5, 8);
  for (auto& row : p.transitions) {
    for (auto& a : row) {
      for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) a(i, j) = i == j ? 1.0 : 0.0;
      }
    }
  }
  for (auto& prior : p.priors) prior = {1.0, 0.0, 0.0, 0.0, 0.0};
  BacktestConfig cfg;
  cfg.fit.warm_start = false;
  const auto report = compare_predictors(cfg, a1, a2, p);
  CHECK(report.bars > 0);
  for (std::size_t c = 0; c < kChains; ++c) {
    CHECK(report.state_agreement[c] == 1.0);
    CHECK(report.value_agreement[c] == 1.0);
  }
  const auto fitted = compare_predictors(cfg, a1, a2);
  for (std::size_t c = 0; c < kChains; ++c) {
    CHECK(fitted.state_agreement[c] >= 0.0);
    CHECK(fitted.state_agreement[c] <= 1.0);
    CHECK(fitted.value_agreement[c] >= fitted.state_agreement[c]);
  }
}
