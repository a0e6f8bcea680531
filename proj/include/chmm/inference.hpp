#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "chmm/matrix.hpp"
#include "chmm/params.hpp"

namespace chmm {

enum class ForwardMode {
  /// Raw trellis values. Exact for the short windows the strategy refits on.
  kLinear,
  /// Both chains are divided by their combined mass after every step; the
  /// per-step factors are kept so the likelihood stays recoverable.
  kScaled,
};

/// Forward trellis of the coupled recursion
///   alpha[c](0, j) = pi[c][j] * b[c](j, o[c][0])
///   alpha[c](t, j) = sum_{c'} sum_i coupling[c'][c] * a[c'][c](i, j) *
///                    b[c](j, o[c][t]) * alpha[c'](t - 1, i).
struct ForwardTrellis {
  ForwardMode mode = ForwardMode::kLinear;
  std::array<Matrix, kChains> alpha;  // T x N, scaled in kScaled mode
  std::vector<double> scale;          // per-step divisors, all 1 in kLinear mode
  double log_scale = 0.0;             // sum of log(scale)

  std::array<double, kChains> chain_likelihood{};      // P^(c); may underflow
  std::array<double, kChains> chain_log_likelihood{};  // log P^(c)
  double likelihood = 0.0;                             // P = P^(1) * P^(2)
  double log_likelihood = 0.0;

  /// sum_j alpha[c](T-1, j) as stored (i.e. before undoing the scaling).
  std::array<double, kChains> scaled_chain_mass{};
};

ForwardTrellis forward(const ChmmParams& params, const ObservationSequence& obs,
                       ForwardMode mode = ForwardMode::kLinear);

/// Maximizing predecessor pair stored for each (t, k) cell.
struct ArgPair {
  std::size_t i = 0;
  std::size_t j = 0;
  bool operator==(const ArgPair&) const = default;
};

/// Per-chain Viterbi trellis. The recursion for chain c is
///   delta[c](t, k) = max_{i,j} delta[c](t-1, i) * a[0][c](i, k) * a[1][c](j, k)
///                    * b[c](k, o[c][t])
/// kept in log space. Zero probabilities become -inf.
struct ViterbiTrellis {
  std::array<Matrix, kChains> log_delta;            // T x N
  std::array<std::vector<ArgPair>, kChains> psi;    // T*N, row-major; row 0 unused
  std::array<double, kChains> log_best{};
  std::array<double, kChains> best_prob{};
  std::array<std::vector<std::size_t>, kChains> paths;

  const ArgPair& backpointer(std::size_t chain, std::size_t t, std::size_t k) const {
    return psi[chain][t * log_delta[chain].cols() + k];
  }
};

ViterbiTrellis coupled_viterbi(const ChmmParams& params, const ObservationSequence& obs);

/// log(x) with log(0) = -inf.
double safe_log(double x);

}  // namespace chmm
