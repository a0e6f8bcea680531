#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "chmm/market.hpp"
#include "chmm/params.hpp"
#include "chmm/strategy.hpp"
#include "chmm/train.hpp"

namespace chmm {

enum class System { kRsi, kCci };
enum class Predictor { kBaseline, kMarginal, kViterbi };

struct BacktestConfig {
  System system = System::kRsi;
  std::size_t lookback = 4;  // observation window T
  std::size_t n_states = 5;
  std::size_t n_bins = 8;
  std::size_t indicator_period = 4;
  std::size_t sma_period = 4;
  std::size_t atr_period = 12;
  double stop_multiple = 2.0;
  double target_multiple = 6.0;
  bool dynamic_allocation = false;
  Predictor predictor = Predictor::kMarginal;
  Fidelity fidelity = Fidelity::kCorrected;
  double notional = 1'000'000.0;
  double initial_capital = 1'000'000.0;
  FitConfig fit;

  /// RSI: ATR 12, stop 2, target 6. CCI: ATR 24, stop 4, target 10.
  static BacktestConfig defaults_for(System system);
};

/// Throws chmm::Error on non-positive periods, a target multiple not above
/// the stop multiple, or non-positive sizes.
void validate(const BacktestConfig& cfg);

enum class ExitReason { kStop, kTarget, kEndOfData };

struct TradeRecord {
  Timestamp entry_time{};
  double entry_price = 0.0;
  Side side = Side::kLong;
  double size = 0.0;  // notional units of the traded asset
  double stop_price = 0.0;
  double target_price = 0.0;
  Timestamp exit_time{};  // end of the bar in which the exit filled
  double exit_price = 0.0;
  ExitReason exit_reason = ExitReason::kEndOfData;
  double pnl = 0.0;  // quote currency

  bool operator==(const TradeRecord&) const = default;
};

struct EquityPoint {
  Timestamp timestamp{};
  double equity = 0.0;
  bool operator==(const EquityPoint&) const = default;
};

using EquityCurve = std::vector<EquityPoint>;

struct PerfStats {
  double ret = 0.0;    // total return, percent
  double vol = 0.0;    // volatility over the same horizon, percent
  double ratio = 0.0;  // ret / vol, zero risk-free rate
  double delta_ratio = 0.0;
};

/// Ratio and delta from already computed return and volatility. Throws when
/// vol is zero.
PerfStats ratio_stats(double ret, double vol, double baseline_ratio);

/// ret: percent change from the first to the last equity point.
/// vol: population standard deviation of per-bar percent returns, scaled by
/// sqrt(number of returns) to the horizon of ret; not annualized.
/// Throws when fewer than two points are given or vol is zero.
PerfStats perf_stats(const EquityCurve& equity, double baseline_ratio = 0.0);

/// One row of the per-bar model diagnostics.
struct BarDiagnostics {
  Timestamp timestamp{};
  std::array<double, kChains> predicted_value{};
  std::array<std::size_t, kChains> predicted_state{};
  std::array<double, kChains> transition_prob{};

  bool operator==(const BarDiagnostics&) const = default;
};

struct FitRecord {
  Timestamp window_end{};
  std::size_t sweeps = 0;
  std::vector<double> log_likelihood_trace;
  /// The warm start had zero likelihood on this window and was smoothed.
  bool smoothed = false;
};

struct BacktestResult {
  std::vector<TradeRecord> trades;
  EquityCurve equity;
  std::optional<PerfStats> stats;  // empty when volatility is zero
  std::vector<Signal> signals;     // every non-empty entry signal, by decision bar
  std::vector<BarDiagnostics> diagnostics;
  std::vector<FitRecord> fits;
};

/// Bar-by-bar simulation. At each bar close the indicator windows of both
/// assets are fitted (unless the predictor is the baseline), the next value of
/// the traded asset's indicator is predicted, and the SMA trigger decides an
/// entry at the next bar's open. Only asset 1 is traded; asset 2 feeds the
/// model. Both series must share timestamps.
BacktestResult run_backtest(const BacktestConfig& cfg, std::span<const OhlcBar> asset1,
                            std::span<const OhlcBar> asset2, double baseline_ratio = 0.0);

struct CompareReport {
  std::size_t bars = 0;
  std::array<double, kChains> state_agreement{};
  std::array<double, kChains> value_agreement{};
};

/// Fits every window once and scores the marginal and Viterbi predictors
/// against each other. `initial` seeds the first fit (jittered uniform when
/// empty).
CompareReport compare_predictors(const BacktestConfig& cfg, std::span<const OhlcBar> asset1,
                                 std::span<const OhlcBar> asset2,
                                 const std::optional<ChmmParams>& initial = std::nullopt);

/// First bar index at which a decision can be made for this configuration.
std::size_t warmup_bars(const BacktestConfig& cfg);

}  // namespace chmm
