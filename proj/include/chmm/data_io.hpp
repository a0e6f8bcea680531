#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chmm/backtest.hpp"
#include "chmm/market.hpp"
#include "chmm/params.hpp"

namespace chmm::io {

// ---------------------------------------------------------------------------
// OHLC input
//
// Header `timestamp,open,high,low,close`; ISO-8601 UTC timestamps; decimal
// prices. Rows are sorted on load and duplicate timestamps keep the last
// record. Every bar must satisfy low <= min(open, close) <= max(open, close)
// <= high.

struct OhlcLoad {
  std::vector<OhlcBar> bars;
  std::vector<std::string> warnings;
};

OhlcLoad parse_ohlc_csv(std::istream& in);
OhlcLoad load_ohlc_csv(const std::filesystem::path& path);
void write_ohlc_csv(std::ostream& out, const std::vector<OhlcBar>& bars);

struct AlignedPair {
  std::vector<OhlcBar> bars1;
  std::vector<OhlcBar> bars2;
  std::vector<Timestamp> gaps;  // stamps present in only one series
};

/// Inner join on timestamp. Inputs must be sorted and duplicate free (as
/// produced by the loader). Throws when the intersection is empty.
AlignedPair align(const std::vector<OhlcBar>& series1, const std::vector<OhlcBar>& series2);

// ---------------------------------------------------------------------------
// Configuration: `key = value` lines, `#` comments. The `system` key picks
// the per-system defaults before the other keys are applied, wherever it
// appears in the file.

BacktestConfig parse_config(std::istream& in);
BacktestConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const BacktestConfig& cfg);

System parse_system(const std::string& text);
Predictor parse_predictor(const std::string& text);
Fidelity parse_fidelity(const std::string& text);
std::string to_string(System s);
std::string to_string(Predictor p);
std::string to_string(Fidelity f);
std::string to_string(Side s);
std::string to_string(ExitReason r);

// ---------------------------------------------------------------------------
// Model parameters: sections `[prior c]`, `[transition from to]`,
// `[emission c]` and `[coupling]` (chains numbered from 1), one matrix row
// per line, values printed with 17 significant digits so a write/read cycle
// is bit exact.

void write_params(std::ostream& out, const ChmmParams& params);
ChmmParams read_params(std::istream& in);
ChmmParams load_params(const std::filesystem::path& path);
void save_params(const std::filesystem::path& path, const ChmmParams& params);

// ---------------------------------------------------------------------------
// Observations: CSV with `obs1,obs2` columns (other columns ignored).

struct LabelledObservations {
  ObservationSequence observations;
  std::optional<std::array<std::vector<std::size_t>, kChains>> states;
};

void write_observations_csv(std::ostream& out, const ObservationSequence& obs,
                            const std::array<std::vector<std::size_t>, kChains>* states = nullptr);
LabelledObservations read_observations_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Backtest outputs. Column orders:
//   trades.csv       entry_time,side,size,entry_price,stop_price,target_price,
//                    exit_time,exit_price,exit_reason,pnl
//   equity.csv       timestamp,equity
//   diagnostics.csv  timestamp,predicted_value_1,predicted_state_1,
//                    transition_prob_1,predicted_value_2,predicted_state_2,
//                    transition_prob_2
//   stats.txt        ret, vol, ratio, delta_ratio as `key = value`
//   fits.jsonl       {"window_end", "sweeps", "log_likelihood", "smoothed"}

void write_trades_csv(std::ostream& out, const std::vector<TradeRecord>& trades);
std::vector<TradeRecord> read_trades_csv(std::istream& in);

void write_equity_csv(std::ostream& out, const EquityCurve& equity);
EquityCurve read_equity_csv(std::istream& in);

void write_diagnostics_csv(std::ostream& out, const std::vector<BarDiagnostics>& rows);
std::vector<BarDiagnostics> read_diagnostics_csv(std::istream& in);

/// `stats` empty writes `ratio = undefined`.
void write_stats(std::ostream& out, const std::optional<PerfStats>& stats);
std::optional<PerfStats> read_stats(std::istream& in);

void write_fit_records(std::ostream& out, const std::vector<FitRecord>& records);
std::vector<FitRecord> read_fit_records(std::istream& in);

}  // namespace chmm::io
