#include "chmm/backtest.hpp"

#include <algorithm>
#include <cmath>

#include "chmm/error.hpp"
#include "chmm/indicators.hpp"
#include "chmm/inference.hpp"

namespace chmm {

namespace {

IndicatorKind indicator_kind(System s) {
  return s == System::kRsi ? IndicatorKind::kRsi : IndicatorKind::kCci;
}

Discretizer discretizer_for(const BacktestConfig& cfg) {
  return cfg.system == System::kRsi ? rsi_discretizer(cfg.n_bins) : cci_discretizer(cfg.n_bins);
}

std::size_t first_indicator_index(const BacktestConfig& cfg) {
  return cfg.system == System::kRsi ? cfg.indicator_period : cfg.indicator_period - 1;
}

std::vector<double> indicator_series(const BacktestConfig& cfg, std::span<const OhlcBar> bars) {
  if (cfg.system == System::kRsi) {
    std::vector<double> closes(bars.size());
    std::transform(bars.begin(), bars.end(), closes.begin(),
                   [](const OhlcBar& b) { return b.close; });
    return rsi(closes, cfg.indicator_period);
  }
  return cci(bars, cfg.indicator_period);
}

void require_aligned(std::span<const OhlcBar> a, std::span<const OhlcBar> b) {
  if (a.size() != b.size()) throw Error("asset series differ in length");
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].timestamp != b[t].timestamp) {
      throw Error("asset series are misaligned at " + format_timestamp(a[t].timestamp));
    }
    if (t > 0 && !(a[t - 1].timestamp < a[t].timestamp)) {
      throw Error("timestamps are not strictly increasing at " + format_timestamp(a[t].timestamp));
    }
  }
}

// Mixes every distribution with the uniform one so no entry is zero.
ChmmParams smooth(const ChmmParams& p, double eps) {
  ChmmParams out = p;
  auto mix = [eps](std::span<double> row) {
    const double u = 1.0 / static_cast<double>(row.size());
    for (double& v : row) v = (1.0 - eps) * v + eps * u;
  };
  for (std::size_t c = 0; c < kChains; ++c) {
    mix(out.priors[c]);
    for (std::size_t to = 0; to < kChains; ++to) {
      for (std::size_t i = 0; i < p.n_states; ++i) mix(out.transitions[c][to].row(i));
    }
    for (std::size_t j = 0; j < p.n_states; ++j) mix(out.emissions[c].row(j));
  }
  for (std::size_t to = 0; to < kChains; ++to) {
    std::array<double, kChains> column{out.coupling[0][to], out.coupling[1][to]};
    mix(column);
    out.coupling[0][to] = column[0];
    out.coupling[1][to] = column[1];
  }
  return out;
}

// Refits the model on each observation window, warm-starting from the
// previous window's parameters when configured.
class WindowModel {
 public:
  WindowModel(const BacktestConfig& cfg, const std::optional<ChmmParams>& initial)
      : cfg_(cfg),
        base_(initial ? *initial : jittered_uniform(cfg.n_states, cfg.n_bins, cfg.fit.seed)) {
    require_valid(base_);
    if (base_.n_states != cfg.n_states || base_.n_bins != cfg.n_bins) {
      throw Error("initial parameters do not match the configured N and M");
    }
  }

  FitRecord fit_window(const ObservationSequence& obs, Timestamp end) {
    const ChmmParams& start = cfg_.fit.warm_start && last_ ? *last_ : base_;
    FitRecord record;
    record.window_end = end;
    FitResult result;
    try {
      result = fit(start, obs, cfg_.fit);
    } catch (const DegenerateModelError&) {
      // Emission rows fitted to the previous window can assign zero mass to a
      // newly observed bin.
      result = fit(smooth(start, kSmoothing), obs, cfg_.fit);
      record.smoothed = true;
    }
    record.sweeps = result.sweeps_run;
    record.log_likelihood_trace = std::move(result.log_likelihood_trace);
    last_ = std::move(result.params);
    return record;
  }

  const ChmmParams& params() const { return *last_; }

 private:
  static constexpr double kSmoothing = 0.01;

  const BacktestConfig& cfg_;
  ChmmParams base_;
  std::optional<ChmmParams> last_;
};

struct Context {
  std::vector<double> ind1;
  std::vector<double> ind2;
  std::vector<double> atr;
  Discretizer disc;
  std::size_t start = 0;
};

Context prepare(const BacktestConfig& cfg, std::span<const OhlcBar> asset1,
                std::span<const OhlcBar> asset2) {
  validate(cfg);
  require_aligned(asset1, asset2);
  Context ctx;
  ctx.start = warmup_bars(cfg);
  if (asset1.size() < ctx.start + 2) {
    throw InsufficientDataError("need at least " + std::to_string(ctx.start + 2) +
                                " bars for this configuration, got " +
                                std::to_string(asset1.size()));
  }
  ctx.ind1 = indicator_series(cfg, asset1);
  ctx.ind2 = indicator_series(cfg, asset2);
  ctx.atr = atr(asset1, cfg.atr_period);
  ctx.disc = discretizer_for(cfg);
  return ctx;
}

ObservationSequence window_at(const BacktestConfig& cfg, const Context& ctx, std::size_t t) {
  ObservationSequence obs;
  for (std::size_t s = t + 1 - cfg.lookback; s <= t; ++s) {
    obs.bins[0].push_back(discretize(ctx.disc, ctx.ind1[s]));
    obs.bins[1].push_back(discretize(ctx.disc, ctx.ind2[s]));
  }
  return obs;
}

Timestamp bar_end(std::span<const OhlcBar> bars, std::size_t t) {
  if (t + 1 < bars.size()) return bars[t + 1].timestamp;
  const auto step = t > 0 ? bars[t].timestamp - bars[t - 1].timestamp : std::chrono::seconds{1};
  return bars[t].timestamp + step;
}

double direction(Side side) { return side == Side::kLong ? 1.0 : -1.0; }

}  // namespace

BacktestConfig BacktestConfig::defaults_for(System system) {
  BacktestConfig cfg;
  cfg.system = system;
  if (system == System::kCci) {
    cfg.atr_period = 24;
    cfg.stop_multiple = 4.0;
    cfg.target_multiple = 10.0;
  }
  return cfg;
}

void validate(const BacktestConfig& cfg) {
  if (cfg.lookback == 0 || cfg.indicator_period == 0 || cfg.sma_period == 0 ||
      cfg.atr_period == 0) {
    throw Error("periods and lookback must be positive");
  }
  if (cfg.n_states == 0 || cfg.n_bins == 0) throw Error("n_states and n_bins must be positive");
  if (!(cfg.stop_multiple > 0.0) || !(cfg.target_multiple > cfg.stop_multiple)) {
    throw Error("need 0 < stop_multiple < target_multiple");
  }
  if (!(cfg.notional > 0.0) || !(cfg.initial_capital > 0.0)) {
    throw Error("notional and initial_capital must be positive");
  }
  if (cfg.fit.sweeps == 0) throw Error("fit sweeps must be at least 1");
  if (!(cfg.fit.rel_tol >= 0.0)) throw Error("rel_tol must be nonnegative");
}

std::size_t warmup_bars(const BacktestConfig& cfg) {
  const std::size_t first = first_indicator_index(cfg);
  return std::max(first + std::max(cfg.lookback - 1, cfg.sma_period), cfg.atr_period);
}

PerfStats ratio_stats(double ret, double vol, double baseline_ratio) {
  if (vol == 0.0) throw Error("volatility is zero; ratio undefined");
  PerfStats s;
  s.ret = ret;
  s.vol = vol;
  s.ratio = ret / vol;
  s.delta_ratio = s.ratio - baseline_ratio;
  return s;
}

PerfStats perf_stats(const EquityCurve& equity, double baseline_ratio) {
  if (equity.size() < 2) throw InsufficientDataError("perf_stats needs at least 2 equity points");
  const double ret = (equity.back().equity / equity.front().equity - 1.0) * 100.0;
  std::vector<double> returns;
  returns.reserve(equity.size() - 1);
  for (std::size_t t = 1; t < equity.size(); ++t) {
    returns.push_back((equity[t].equity / equity[t - 1].equity - 1.0) * 100.0);
  }
  const double n = static_cast<double>(returns.size());
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  var /= n;
  return ratio_stats(ret, std::sqrt(var) * std::sqrt(n), baseline_ratio);
}

BacktestResult run_backtest(const BacktestConfig& cfg, std::span<const OhlcBar> asset1,
                            std::span<const OhlcBar> asset2, double baseline_ratio) {
  const Context ctx = prepare(cfg, asset1, asset2);
  const std::size_t n = asset1.size();
  const IndicatorKind kind = indicator_kind(cfg.system);
  const bool use_model = cfg.predictor != Predictor::kBaseline;
  std::optional<WindowModel> model;
  if (use_model) model.emplace(cfg, std::nullopt);

  BacktestResult out;
  std::optional<TradeRecord> long_pos;
  std::optional<TradeRecord> short_pos;
  struct Pending {
    Side side;
    double size;
    double atr;
  };
  std::optional<Pending> pending;
  double realized = 0.0;

  auto close_position = [&](std::optional<TradeRecord>& pos, double price, ExitReason reason,
                            std::size_t t) {
    TradeRecord tr = *pos;
    tr.exit_price = price;
    tr.exit_reason = reason;
    tr.exit_time = bar_end(asset1, t);
    tr.pnl = direction(tr.side) * (tr.exit_price - tr.entry_price) * tr.size;
    realized += tr.pnl;
    out.trades.push_back(tr);
    pos.reset();
  };

  for (std::size_t t = 0; t < n; ++t) {
    const OhlcBar& bar = asset1[t];

    // Entry decided at the previous close fills at this bar's open.
    if (pending) {
      TradeRecord tr;
      tr.entry_time = bar.timestamp;
      tr.entry_price = bar.open;
      tr.side = pending->side;
      tr.size = pending->size;
      const double dir = direction(tr.side);
      tr.stop_price = tr.entry_price - dir * cfg.stop_multiple * pending->atr;
      tr.target_price = tr.entry_price + dir * cfg.target_multiple * pending->atr;
      (tr.side == Side::kLong ? long_pos : short_pos) = tr;
      pending.reset();
    }

    // Bracket exits inside the bar; the stop wins when both levels are touched.
    if (long_pos) {
      if (bar.low <= long_pos->stop_price) {
        close_position(long_pos, long_pos->stop_price, ExitReason::kStop, t);
      } else if (bar.high >= long_pos->target_price) {
        close_position(long_pos, long_pos->target_price, ExitReason::kTarget, t);
      }
    }
    if (short_pos) {
      if (bar.high >= short_pos->stop_price) {
        close_position(short_pos, short_pos->stop_price, ExitReason::kStop, t);
      } else if (bar.low <= short_pos->target_price) {
        close_position(short_pos, short_pos->target_price, ExitReason::kTarget, t);
      }
    }

    if (t + 1 == n) {
      if (long_pos) close_position(long_pos, bar.close, ExitReason::kEndOfData, t);
      if (short_pos) close_position(short_pos, bar.close, ExitReason::kEndOfData, t);
    }

    double equity = cfg.initial_capital + realized;
    for (const auto* pos : {&long_pos, &short_pos}) {
      if (*pos) equity += direction((*pos)->side) * (bar.close - (*pos)->entry_price) * (*pos)->size;
    }
    out.equity.push_back({bar.timestamp, equity});

    if (t < ctx.start || t + 1 >= n) continue;

    // Decision at the close of bar t, using data up to and including t.
    std::vector<double> series;
    double size_fraction = 1.0;
    if (!use_model) {
      series.assign(ctx.ind1.begin() + static_cast<std::ptrdiff_t>(t - cfg.sma_period),
                    ctx.ind1.begin() + static_cast<std::ptrdiff_t>(t + 1));
    } else {
      const ObservationSequence obs = window_at(cfg, ctx, t);
      out.fits.push_back(model->fit_window(obs, bar.timestamp));
      const ChmmParams& params = model->params();
      const StatePrediction pred =
          cfg.predictor == Predictor::kMarginal
              ? next_state_marginal(params, cfg.fidelity)
              : next_state_viterbi(params, coupled_viterbi(params, obs), cfg.fidelity);

      BarDiagnostics diag;
      diag.timestamp = bar.timestamp;
      for (std::size_t c = 0; c < kChains; ++c) {
        diag.predicted_state[c] = pred.psi[c];
        diag.predicted_value[c] = predict_observation(params, pred.psi[c], c, ctx.disc);
        diag.transition_prob[c] = allocation_fraction(params, pred.psi[c], c);
      }
      out.diagnostics.push_back(diag);

      series.assign(ctx.ind1.begin() + static_cast<std::ptrdiff_t>(t + 1 - cfg.sma_period),
                    ctx.ind1.begin() + static_cast<std::ptrdiff_t>(t + 1));
      series.push_back(diag.predicted_value[0]);
      if (cfg.dynamic_allocation) size_fraction = diag.transition_prob[0];
    }

    Signal sig = generate_signal(kind, series, cfg.sma_period,
                                 {long_pos.has_value(), short_pos.has_value()});
    if (sig.side == Side::kNone) continue;
    const double atr_now = ctx.atr[t];
    if (!(atr_now > 0.0) || !(size_fraction > 0.0)) continue;
    sig.timestamp = bar.timestamp;
    sig.instrument = 0;
    sig.size_fraction = size_fraction;
    out.signals.push_back(sig);
    pending = Pending{sig.side, cfg.notional * size_fraction, atr_now};
  }

  try {
    out.stats = perf_stats(out.equity, baseline_ratio);
  } catch (const Error&) {
    out.stats.reset();
  }
  return out;
}

CompareReport compare_predictors(const BacktestConfig& cfg, std::span<const OhlcBar> asset1,
                                 std::span<const OhlcBar> asset2,
                                 const std::optional<ChmmParams>& initial) {
  const Context ctx = prepare(cfg, asset1, asset2);
  WindowModel model(cfg, initial);
  CompareReport report;
  std::array<std::size_t, kChains> same_state{};
  std::array<std::size_t, kChains> same_value{};
  for (std::size_t t = ctx.start; t + 1 < asset1.size(); ++t) {
    const ObservationSequence obs = window_at(cfg, ctx, t);
    model.fit_window(obs, asset1[t].timestamp);
    const ChmmParams& params = model.params();
    const StatePrediction marginal = next_state_marginal(params, cfg.fidelity);
    const StatePrediction viterbi =
        next_state_viterbi(params, coupled_viterbi(params, obs), cfg.fidelity);
    for (std::size_t c = 0; c < kChains; ++c) {
      same_state[c] += marginal.psi[c] == viterbi.psi[c];
      same_value[c] += predict_observation(params, marginal.psi[c], c, ctx.disc) ==
                       predict_observation(params, viterbi.psi[c], c, ctx.disc);
    }
    ++report.bars;
  }
  for (std::size_t c = 0; c < kChains; ++c) {
    const double bars = static_cast<double>(std::max<std::size_t>(report.bars, 1));
    report.state_agreement[c] = static_cast<double>(same_state[c]) / bars;
    report.value_agreement[c] = static_cast<double>(same_value[c]) / bars;
  }
  return report;
}

}  // namespace chmm
