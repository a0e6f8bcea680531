#include "chmm/strategy.hpp"

#include <cmath>

#include "chmm/error.hpp"

namespace chmm {

namespace {

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

// The matrix chain `chain` uses for its own term in the prediction rules.
const Matrix& self_matrix(const ChmmParams& p, std::size_t chain, Fidelity fidelity) {
  if (chain == 1 && fidelity == Fidelity::kLiteral) return p.transitions[0][0];
  return p.transitions[chain][chain];
}

std::vector<double> column_sums(const Matrix& a) {
  std::vector<double> sums(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) sums[j] += a(i, j);
  }
  return sums;
}

void require_state(const ChmmParams& p, std::size_t state, std::size_t chain) {
  if (chain >= kChains) throw IndexError("chain index out of range");
  if (state >= p.n_states) throw IndexError("state index out of range");
}

}  // namespace

StatePrediction next_state_marginal(const ChmmParams& params, Fidelity fidelity) {
  StatePrediction out;
  out.method = PredictionMethod::kMarginal;
  for (std::size_t c = 0; c < kChains; ++c) {
    const std::size_t other = 1 - c;
    const auto own_sums = column_sums(self_matrix(params, c, fidelity));
    const auto cross_sums = column_sums(params.transitions[other][c]);
    std::vector<double> score(params.n_states);
    for (std::size_t j = 0; j < params.n_states; ++j) {
      score[j] = params.coupling[c][c] * own_sums[j] + params.coupling[other][c] * cross_sums[j];
    }
    out.psi[c] = argmax(score);
  }
  return out;
}

StatePrediction next_state_viterbi(const ChmmParams& params, const ViterbiTrellis& trellis,
                                   Fidelity fidelity) {
  std::array<std::size_t, kChains> phi{};
  for (std::size_t c = 0; c < kChains; ++c) {
    if (trellis.paths[c].empty()) throw Error("Viterbi trellis has no decoded path");
    phi[c] = trellis.paths[c].back();
    require_state(params, phi[c], c);
  }
  StatePrediction out;
  out.method = PredictionMethod::kViterbi;
  for (std::size_t c = 0; c < kChains; ++c) {
    const std::size_t other = 1 - c;
    const Matrix& own = self_matrix(params, c, fidelity);
    const Matrix& cross = params.transitions[other][c];
    std::vector<double> score(params.n_states);
    for (std::size_t j = 0; j < params.n_states; ++j) {
      score[j] = params.coupling[c][c] * own(phi[c], j) +
                 params.coupling[other][c] * cross(phi[other], j);
    }
    out.psi[c] = argmax(score);
  }
  return out;
}

double predict_observation(const ChmmParams& params, std::size_t state, std::size_t chain,
                           const Discretizer& d) {
  require_state(params, state, chain);
  const std::size_t k = argmax(params.emissions[chain].row(state));
  return bin_value(d, k);
}

double allocation_fraction(const ChmmParams& params, std::size_t state, std::size_t chain) {
  require_state(params, state, chain);
  const std::size_t n = params.n_states;
  const std::size_t other = 1 - chain;
  const Matrix& own = params.transitions[chain][chain];
  const Matrix& cross = params.transitions[other][chain];
  const double w_own = params.coupling[chain][chain];
  const double w_cross = params.coupling[other][chain];

  // mass[k] = sum_i sum_j (w_own * own(i, k) + w_cross * cross(j, k))
  std::vector<double> mass(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) acc += w_own * own(i, k) + w_cross * cross(j, k);
    }
    mass[k] = acc;
  }
  double total = 0.0;
  for (double v : mass) total += v;
  if (!(total > 0.0)) throw DegenerateModelError("transition mass is zero");
  return mass[state] / total;
}

Signal generate_signal(IndicatorKind kind, std::span<const double> series, std::size_t sma_period,
                       OpenPositions open) {
  Signal out;
  if (sma_period == 0 || series.size() < sma_period + 1) return out;

  const std::size_t len = series.size();
  double prev = 0.0;
  double cur = 0.0;
  for (std::size_t k = 0; k < sma_period; ++k) {
    prev += series[len - 2 - k];
    cur += series[len - 1 - k];
  }
  prev /= static_cast<double>(sma_period);
  cur /= static_cast<double>(sma_period);
  if (std::isnan(prev) || std::isnan(cur)) return out;
  out.trigger_value = cur;

  Side side = Side::kNone;
  if (kind == IndicatorKind::kRsi) {
    if (prev < kRsiOversold && cur >= kRsiOversold) {
      side = Side::kLong;
    } else if (prev > kRsiOverbought && cur <= kRsiOverbought) {
      side = Side::kShort;
    }
  } else {
    if (prev > kCciLongLevel && cur <= kCciLongLevel) {
      side = Side::kLong;
    } else if (prev < kCciShortLevel && cur >= kCciShortLevel) {
      side = Side::kShort;
    }
  }
  if ((side == Side::kLong && open.long_open) || (side == Side::kShort && open.short_open)) {
    side = Side::kNone;
  }
  out.side = side;
  return out;
}

}  // namespace chmm
