#include "chmm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chmm/error.hpp"
#include "chmm/random.hpp"

namespace chmm::oracle {

namespace {

double log_or_neg_inf(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

// base^exp, or 0 when it exceeds `limit`.
std::size_t bounded_power(std::size_t base, std::size_t exp, std::size_t limit) {
  std::size_t result = 1;
  for (std::size_t k = 0; k < exp; ++k) {
    if (base != 0 && result > limit / base) return 0;
    result *= base;
  }
  return result;
}

// Advances a mixed-radix odometer; returns false after the last combination.
bool next_combination(std::vector<std::size_t>& digits, std::size_t radix) {
  for (std::size_t k = digits.size(); k-- > 0;) {
    if (++digits[k] < radix) return true;
    digits[k] = 0;
  }
  return false;
}

void guard_size(const ChmmParams& params, std::size_t len) {
  if (bounded_power(params.n_states, len, kMaxPathsPerChain) == 0) {
    throw Error("instance too large for exhaustive enumeration (N^T > " +
                std::to_string(kMaxPathsPerChain) + ")");
  }
}

}  // namespace

SampledPaths sample_chmm(const ChmmParams& params, std::size_t length, std::uint64_t seed) {
  require_valid(params);
  const std::size_t n = params.n_states;
  Rng rng(seed);
  SampledPaths out;
  out.seed = seed;
  for (std::size_t c = 0; c < kChains; ++c) {
    out.states[c].resize(length);
    out.observations.bins[c].resize(length);
  }
  std::vector<double> mix(n);
  for (std::size_t t = 0; t < length; ++t) {
    std::array<std::size_t, kChains> next{};
    for (std::size_t c = 0; c < kChains; ++c) {
      if (t == 0) {
        next[c] = rng.categorical(params.priors[c]);
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) {
        mix[j] = params.coupling[0][c] * params.transitions[0][c](out.states[0][t - 1], j) +
                 params.coupling[1][c] * params.transitions[1][c](out.states[1][t - 1], j);
      }
      next[c] = rng.categorical(mix);
    }
    for (std::size_t c = 0; c < kChains; ++c) {
      out.states[c][t] = next[c];
      out.observations.bins[c][t] = rng.categorical(params.emissions[c].row(next[c]));
    }
  }
  return out;
}

BruteLikelihood brute_likelihood(const ChmmParams& params, const ObservationSequence& obs) {
  require_valid(obs, params.n_bins);
  const std::size_t n = params.n_states;
  const std::size_t len = obs.length();
  guard_size(params, len);

  // A trajectory visits one (chain, state) node per step; node = chain * N + state.
  // Its weight is prior * emission at the first node, then
  // coupling * transition * emission for every hop. Summing the weights of all
  // trajectories that end in chain c gives P^(c).
  const std::size_t nodes = kChains * n;
  std::vector<std::size_t> walk(len, 0);
  BruteLikelihood out;
  do {
    const std::size_t c0 = walk[0] / n;
    const std::size_t s0 = walk[0] % n;
    double weight = params.priors[c0][s0] * params.emissions[c0](s0, obs.bins[c0][0]);
    for (std::size_t t = 1; t < len && weight != 0.0; ++t) {
      const std::size_t from = walk[t - 1] / n;
      const std::size_t i = walk[t - 1] % n;
      const std::size_t to = walk[t] / n;
      const std::size_t j = walk[t] % n;
      weight *= params.coupling[from][to] * params.transitions[from][to](i, j) *
                params.emissions[to](j, obs.bins[to][t]);
    }
    out.chain[walk[len - 1] / n] += weight;
  } while (next_combination(walk, nodes));
  out.joint = out.chain[0] * out.chain[1];
  return out;
}

BruteViterbi brute_viterbi(const ChmmParams& params, const ObservationSequence& obs) {
  require_valid(obs, params.n_bins);
  const std::size_t n = params.n_states;
  const std::size_t len = obs.length();
  guard_size(params, len);
  const double neg_inf = -std::numeric_limits<double>::infinity();

  BruteViterbi out;
  for (std::size_t c = 0; c < kChains; ++c) {
    const Matrix& own = params.transitions[0][c];
    const Matrix& other = params.transitions[1][c];
    const Matrix& b = params.emissions[c];

    double best = neg_inf;
    double runner_up = neg_inf;
    bool have_best = false;
    std::vector<std::size_t> best_path;

    std::vector<std::size_t> path(len, 0);
    do {
      // Best score of this state path over every sequence of cross-chain indices.
      double path_best = neg_inf;
      bool have_path_best = false;
      std::vector<std::size_t> cross(len > 1 ? len - 1 : 0, 0);
      do {
        double score = log_or_neg_inf(params.priors[c][path[0]]) +
                       log_or_neg_inf(b(path[0], obs.bins[c][0]));
        for (std::size_t t = 1; t < len; ++t) {
          score = score + log_or_neg_inf(own(path[t - 1], path[t])) +
                  log_or_neg_inf(other(cross[t - 1], path[t]));
          score = score + log_or_neg_inf(b(path[t], obs.bins[c][t]));
        }
        if (!have_path_best || score > path_best) {
          path_best = score;
          have_path_best = true;
        }
      } while (next_combination(cross, n));

      if (!have_best || path_best > best) {
        runner_up = best;
        best = path_best;
        best_path = path;
        have_best = true;
      } else if (path_best > runner_up) {
        runner_up = path_best;
      }
    } while (next_combination(path, n));

    out.paths[c] = best_path;
    out.log_score[c] = best;
    const bool single = bounded_power(n, len, kMaxPathsPerChain) == 1;
    out.margin[c] = single ? std::numeric_limits<double>::infinity() : best - runner_up;
  }
  return out;
}

double fd_gradient(const ChmmParams& params, const ObservationSequence& obs, const ParamRef& which,
                   double h) {
  if (!(h > 0.0)) throw Error("finite-difference step must be positive");
  const double w = param_value(params, which);
  if (w - h < 0.0) {
    throw Error("finite-difference perturbation leaves the parameter domain");
  }
  ChmmParams plus = params;
  ChmmParams minus = params;
  param_value(plus, which) = w + h;
  param_value(minus, which) = w - h;
  return (brute_likelihood(plus, obs).joint - brute_likelihood(minus, obs).joint) / (2.0 * h);
}

std::vector<OhlcBar> synthetic_bars(std::span<const std::size_t> states, std::size_t n_states,
                                    const SyntheticMarketConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<OhlcBar> bars;
  bars.reserve(states.size());
  double prev_close = cfg.start_price;
  for (std::size_t t = 0; t < states.size(); ++t) {
    const double frac = n_states > 1 ? static_cast<double>(states[t]) / (n_states - 1) : 0.5;
    const double drift = cfg.drift_low + frac * (cfg.drift_high - cfg.drift_low);
    OhlcBar bar;
    bar.timestamp = cfg.start + std::chrono::seconds{cfg.bar_seconds * static_cast<std::int64_t>(t)};
    bar.open = prev_close;
    bar.close = prev_close * std::exp(drift + cfg.noise * rng.normal());
    const double wick_up = std::abs(rng.normal()) * cfg.noise * 0.5;
    const double wick_down = std::abs(rng.normal()) * cfg.noise * 0.5;
    bar.high = std::max(bar.open, bar.close) * std::exp(wick_up);
    bar.low = std::min(bar.open, bar.close) * std::exp(-wick_down);
    bars.push_back(bar);
    prev_close = bar.close;
  }
  return bars;
}

}  // namespace chmm::oracle
