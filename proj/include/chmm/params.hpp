#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "chmm/matrix.hpp"

namespace chmm {

/// Number of coupled chains. Chain 0 is the traded asset, chain 1 the filter.
inline constexpr std::size_t kChains = 2;

/// Full parameter set of a two-chain fully coupled HMM with discrete emissions.
///
/// Chains are indexed 0 and 1. `transitions[from][to]` holds the N x N matrix
/// whose row i gives the contribution of state i in chain `from` to the next
/// state of chain `to`. `coupling[from][to]` is the convex weight of chain
/// `from` in chain `to`'s transition law, so each column of `coupling` sums
/// to one.
struct ChmmParams {
  std::size_t n_states = 0;
  std::size_t n_bins = 0;
  std::array<std::vector<double>, kChains> priors;
  std::array<std::array<Matrix, kChains>, kChains> transitions;
  std::array<Matrix, kChains> emissions;
  std::array<std::array<double, kChains>, kChains> coupling{};

  /// Every distribution uniform, coupling weights 1/2.
  static ChmmParams uniform(std::size_t n_states, std::size_t n_bins);

  bool operator==(const ChmmParams&) const = default;
};

/// Discretized observations for both chains over a common window.
struct ObservationSequence {
  std::array<std::vector<std::size_t>, kChains> bins;

  std::size_t length() const { return bins[0].size(); }
};

enum class ViolationKind { kShape, kRange, kPrior, kTransition, kEmission, kCoupling };

struct Violation {
  ViolationKind kind;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

inline constexpr double kSimplexTolerance = 1e-9;

/// Lists every violated constraint; an empty report means the parameters are
/// a valid model.
ValidationReport validate_params(const ChmmParams& params);

/// Throws chmm::Error describing the first violation, if any.
void require_valid(const ChmmParams& params);

/// Throws when the chains differ in length, the window is empty or a bin
/// index is >= n_bins.
void require_valid(const ObservationSequence& obs, std::size_t n_bins);

/// Joint transition probability of chain `chain` moving to state `target`
/// given chain 0 was in `prev0` and chain 1 in `prev1`:
/// coupling[0][chain] * a[0][chain](prev0, target) +
/// coupling[1][chain] * a[1][chain](prev1, target).
double joint_transition(const ChmmParams& params, std::size_t chain,
                        std::size_t prev0, std::size_t prev1,
                        std::size_t target);

}  // namespace chmm
