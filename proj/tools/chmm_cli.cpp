#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "chmm/backtest.hpp"
#include "chmm/data_io.hpp"
#include "chmm/error.hpp"
#include "chmm/oracle.hpp"
#include "chmm/train.hpp"

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw chmm::Error("cannot write '" + path.string() + "'");
  return out;
}

std::vector<chmm::OhlcBar> load_bars(const fs::path& path) {
  auto load = chmm::io::load_ohlc_csv(path);
  for (const auto& w : load.warnings) std::cerr << "warning: " << path.string() << ": " << w << '\n';
  return std::move(load.bars);
}

chmm::io::AlignedPair load_pair(const fs::path& a1, const fs::path& a2) {
  auto pair = chmm::io::align(load_bars(a1), load_bars(a2));
  if (!pair.gaps.empty()) {
    std::cerr << "warning: dropped " << pair.gaps.size()
              << " timestamps present in only one asset\n";
  }
  return pair;
}

struct BacktestArgs {
  std::string config;
  std::string asset1;
  std::string asset2;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> system;
  std::optional<std::string> predictor;
  std::optional<std::string> fidelity;
  bool dynamic = false;
};

chmm::BacktestConfig resolve_config(const BacktestArgs& a) {
  chmm::BacktestConfig cfg;
  if (!a.config.empty()) {
    cfg = chmm::io::load_config(a.config);
  }
  if (a.system) {
    // Switching system swaps in that system's exit defaults; explicit file
    // values for everything else are kept.
    const auto sys = chmm::io::parse_system(*a.system);
    if (sys != cfg.system) {
      const auto d = chmm::BacktestConfig::defaults_for(sys);
      cfg.system = sys;
      cfg.atr_period = d.atr_period;
      cfg.stop_multiple = d.stop_multiple;
      cfg.target_multiple = d.target_multiple;
    }
  }
  if (a.predictor) cfg.predictor = chmm::io::parse_predictor(*a.predictor);
  if (a.fidelity) cfg.fidelity = chmm::io::parse_fidelity(*a.fidelity);
  if (a.dynamic) cfg.dynamic_allocation = true;
  if (a.seed) cfg.fit.seed = *a.seed;
  return cfg;
}

int run_backtest_cmd(const BacktestArgs& a) {
  const auto cfg = resolve_config(a);
  const auto pair = load_pair(a.asset1, a.asset2);

  double baseline_ratio = 0.0;
  if (cfg.predictor != chmm::Predictor::kBaseline) {
    auto base_cfg = cfg;
    base_cfg.predictor = chmm::Predictor::kBaseline;
    base_cfg.dynamic_allocation = false;
    const auto base = chmm::run_backtest(base_cfg, pair.bars1, pair.bars2);
    if (base.stats) {
      baseline_ratio = base.stats->ratio;
    } else {
      std::cerr << "warning: baseline has zero volatility; delta_ratio is relative to 0\n";
    }
  }
  const auto result = chmm::run_backtest(cfg, pair.bars1, pair.bars2, baseline_ratio);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "trades.csv");
    chmm::io::write_trades_csv(out, result.trades);
  }
  {
    auto out = open_out(dir / "equity.csv");
    chmm::io::write_equity_csv(out, result.equity);
  }
  {
    auto out = open_out(dir / "stats.txt");
    chmm::io::write_stats(out, result.stats);
  }
  {
    auto out = open_out(dir / "diagnostics.csv");
    chmm::io::write_diagnostics_csv(out, result.diagnostics);
  }
  {
    auto out = open_out(dir / "fits.jsonl");
    chmm::io::write_fit_records(out, result.fits);
  }
  {
    auto out = open_out(dir / "config.cfg");
    chmm::io::write_config(out, cfg);
  }

  std::cout << "trades: " << result.trades.size() << '\n';
  chmm::io::write_stats(std::cout, result.stats);
  return 0;
}

struct FitArgs {
  std::string obs;
  std::size_t states = 5;
  std::size_t bins = 8;
  std::size_t sweeps = 3;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  std::string init;
  std::string out = "params.txt";
  std::string trace;
};

int run_fit_cmd(const FitArgs& a) {
  std::ifstream in(a.obs);
  if (!in) throw chmm::Error("cannot open '" + a.obs + "'");
  const auto obs = chmm::io::read_observations_csv(in).observations;

  const auto initial = a.init.empty() ? chmm::jittered_uniform(a.states, a.bins, a.seed)
                                      : chmm::io::load_params(a.init);
  chmm::FitConfig cfg;
  cfg.sweeps = a.sweeps;
  cfg.rel_tol = a.rel_tol;
  cfg.seed = a.seed;
  const auto result = chmm::fit(initial, obs, cfg);

  chmm::io::save_params(a.out, result.params);
  if (!a.trace.empty()) {
    auto out = open_out(a.trace);
    out << "sweep,log_likelihood\n";
    char buf[64];
    for (std::size_t k = 0; k < result.log_likelihood_trace.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, result.log_likelihood_trace[k]);
      out << buf;
    }
  }
  std::printf("sweeps: %zu%s\nlog_likelihood: %.10g\n", result.sweeps_run,
              result.stopped_early ? " (converged)" : "", result.log_likelihood_trace.back());
  return 0;
}

struct SimulateArgs {
  std::string params;
  std::size_t bars = 500;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int run_simulate_cmd(const SimulateArgs& a) {
  const auto params = chmm::io::load_params(a.params);
  chmm::require_valid(params);
  const auto sample = chmm::oracle::sample_chmm(params, a.bars, a.seed);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  const chmm::oracle::SyntheticMarketConfig market;
  for (std::size_t c = 0; c < chmm::kChains; ++c) {
    // Distinct streams per asset, both derived from the one seed.
    const auto bars = chmm::oracle::synthetic_bars(sample.states[c], params.n_states, market,
                                                   a.seed * 2 + c + 1);
    auto out = open_out(dir / ("asset" + std::to_string(c + 1) + ".csv"));
    chmm::io::write_ohlc_csv(out, bars);
  }
  auto out = open_out(dir / "observations.csv");
  chmm::io::write_observations_csv(out, sample.observations, &sample.states);
  return 0;
}

struct CompareArgs {
  BacktestArgs bt;
  std::string params;
};

int run_compare_cmd(const CompareArgs& a) {
  const auto cfg = resolve_config(a.bt);
  const auto pair = load_pair(a.bt.asset1, a.bt.asset2);
  std::optional<chmm::ChmmParams> initial;
  if (!a.params.empty()) initial = chmm::io::load_params(a.params);
  const auto report = chmm::compare_predictors(cfg, pair.bars1, pair.bars2, initial);
  std::printf("bars: %zu\n", report.bars);
  for (std::size_t c = 0; c < chmm::kChains; ++c) {
    std::printf("chain %zu state_agreement: %.6f\n", c + 1, report.state_agreement[c]);
    std::printf("chain %zu value_agreement: %.6f\n", c + 1, report.value_agreement[c]);
  }
  return 0;
}

struct StatsArgs {
  std::string equity;
  double baseline_ratio = 0.0;
};

int run_stats_cmd(const StatsArgs& a) {
  std::ifstream in(a.equity);
  if (!in) throw chmm::Error("cannot open '" + a.equity + "'");
  const auto curve = chmm::io::read_equity_csv(in);
  chmm::io::write_stats(std::cout, chmm::perf_stats(curve, a.baseline_ratio));
  return 0;
}

struct InitArgs {
  std::size_t states = 5;
  std::size_t bins = 8;
  std::uint64_t seed = 0;
  std::string out = "params.txt";
};

void add_backtest_flags(CLI::App* cmd, BacktestArgs& a) {
  cmd->add_option("--config", a.config, "Configuration file (key = value)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--asset1", a.asset1, "OHLC CSV of the traded asset")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--asset2", a.asset2, "OHLC CSV of the coupled asset")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "Seed for the initial model");
  cmd->add_option("--system", a.system, "rsi or cci")
      ->check(CLI::IsMember({"rsi", "cci"}));
  cmd->add_option("--predictor", a.predictor, "baseline, marginal or viterbi")
      ->check(CLI::IsMember({"baseline", "marginal", "viterbi"}));
  cmd->add_option("--fidelity", a.fidelity, "corrected or literal prediction rule")
      ->check(CLI::IsMember({"corrected", "literal"}));
  cmd->add_flag("--dynamic", a.dynamic, "Size positions by the model allocation fraction");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled hidden Markov model toolkit"};
  app.require_subcommand(1);

  BacktestArgs bt;
  auto* backtest = app.add_subcommand("backtest", "Run a backtest over two aligned assets");
  add_backtest_flags(backtest, bt);
  backtest->add_option("--out", bt.out, "Output directory");

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "Fit a model to an observation sequence");
  fitc->add_option("--obs", fa.obs, "Observation CSV (obs1,obs2)")->required()->check(CLI::ExistingFile);
  fitc->add_option("--states", fa.states, "Hidden states per chain")->check(CLI::PositiveNumber);
  fitc->add_option("--bins", fa.bins, "Observation bins")->check(CLI::PositiveNumber);
  fitc->add_option("--sweeps", fa.sweeps, "Maximum re-estimation sweeps");
  fitc->add_option("--rel-tol", fa.rel_tol, "Stop when the relative likelihood gain falls below this");
  fitc->add_option("--seed", fa.seed, "Seed for the jittered initial model");
  fitc->add_option("--init", fa.init, "Initial parameter file")->check(CLI::ExistingFile);
  fitc->add_option("--out", fa.out, "Output parameter file");
  fitc->add_option("--trace", fa.trace, "Write the log-likelihood trace here");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Sample synthetic observations and OHLC bars");
  simulate->add_option("--params", sa.params, "Parameter file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--bars", sa.bars, "Number of bars")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sa.seed, "Sampling seed");
  simulate->add_option("--out", sa.out, "Output directory");

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "Agreement between marginal and Viterbi predictors");
  add_backtest_flags(compare, ca.bt);
  compare->add_option("--params", ca.params, "Initial parameter file")->check(CLI::ExistingFile);

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Performance statistics of an equity curve");
  stats->add_option("--equity", st.equity, "Equity CSV")->required()->check(CLI::ExistingFile);
  stats->add_option("--baseline-ratio", st.baseline_ratio, "Ratio the delta is measured against");

  InitArgs ia;
  auto* init = app.add_subcommand("init", "Write a jittered uniform parameter file");
  init->add_option("--states", ia.states, "Hidden states per chain")->check(CLI::PositiveNumber);
  init->add_option("--bins", ia.bins, "Observation bins")->check(CLI::PositiveNumber);
  init->add_option("--seed", ia.seed, "Jitter seed");
  init->add_option("--out", ia.out, "Output parameter file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*backtest) return run_backtest_cmd(bt);
    if (*fitc) return run_fit_cmd(fa);
    if (*simulate) return run_simulate_cmd(sa);
    if (*compare) return run_compare_cmd(ca);
    if (*stats) return run_stats_cmd(st);
    if (*init) {
      chmm::io::save_params(ia.out, chmm::jittered_uniform(ia.states, ia.bins, ia.seed));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
