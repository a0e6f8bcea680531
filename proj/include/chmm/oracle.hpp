#pragma once

// Ground-truth generators and brute-force references. Nothing here calls the
// recursive inference or training code: every quantity is obtained by
// sampling or by exhaustive enumeration, so the two routes check each other.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chmm/market.hpp"
#include "chmm/params.hpp"
#include "chmm/train.hpp"

namespace chmm::oracle {

struct SampledPaths {
  std::array<std::vector<std::size_t>, kChains> states;
  ObservationSequence observations;
  std::uint64_t seed = 0;
};

/// Draws hidden paths and observations from the coupled generative law: the
/// first state from the prior, later states from the coupling-weighted
/// mixture of both chains' transition rows, observations from the emissions.
SampledPaths sample_chmm(const ChmmParams& params, std::size_t length, std::uint64_t seed);

struct BruteLikelihood {
  std::array<double, kChains> chain{};  // P^(1), P^(2)
  double joint = 0.0;                   // P^(1) * P^(2)
};

/// Largest enumeration accepted by the brute-force routines, per chain.
inline constexpr std::size_t kMaxPathsPerChain = 4096;

/// Expands the forward recursion into an explicit sum over every
/// (chain, state) trajectory ending in each chain. Throws chmm::Error when
/// N^T exceeds kMaxPathsPerChain.
BruteLikelihood brute_likelihood(const ChmmParams& params, const ObservationSequence& obs);

struct BruteViterbi {
  std::array<std::vector<std::size_t>, kChains> paths;
  std::array<double, kChains> log_score{};
  /// Gap in log score between the best state path and the runner-up
  /// (infinity when N^T == 1). Paths are only comparable when it is nonzero.
  std::array<double, kChains> margin{};
};

/// Scores every state path (and every cross-chain index sequence) with the
/// coupled Viterbi product rule and returns the maximum per chain.
BruteViterbi brute_viterbi(const ChmmParams& params, const ObservationSequence& obs);

/// Central difference (P(w + h) - P(w - h)) / 2h of the joint likelihood,
/// evaluated by brute_likelihood. The named parameter is perturbed in
/// place; its simplex row is deliberately NOT renormalized, matching the
/// analytic partials, which treat each parameter as a free variable.
double fd_gradient(const ChmmParams& params, const ObservationSequence& obs,
                   const ParamRef& which, double h);

struct SyntheticMarketConfig {
  double start_price = 1.0;
  /// Per-bar log drift of the lowest and highest states; states in between
  /// are spaced linearly.
  double drift_low = -0.002;
  double drift_high = 0.002;
  double noise = 0.001;
  std::int64_t bar_seconds = 600;
  Timestamp start = Timestamp{std::chrono::seconds{1356998400}};  // 2013-01-01T00:00:00Z
};

/// OHLC bars whose close-to-close drift follows a sampled hidden path.
std::vector<OhlcBar> synthetic_bars(std::span<const std::size_t> states, std::size_t n_states,
                                    const SyntheticMarketConfig& cfg, std::uint64_t seed);

}  // namespace chmm::oracle
