#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "chmm/indicators.hpp"
#include "chmm/inference.hpp"
#include "chmm/market.hpp"
#include "chmm/params.hpp"

namespace chmm {

/// Which form of the chain-2 prediction rule to use. The printed rule reuses
/// the chain-1 self-transition matrix a[0][0] for chain 2's own term; the
/// corrected form uses a[1][1], symmetric with chain 1.
enum class Fidelity { kCorrected, kLiteral };

enum class PredictionMethod { kMarginal, kViterbi };

struct StatePrediction {
  std::array<std::size_t, kChains> psi{};
  PredictionMethod method = PredictionMethod::kMarginal;
  std::optional<double> x_fraction;
};

/// Next state per chain from column sums of the transition matrices:
///   psi[0] = argmax_j coupling[0][0] * sum_i a[0][0](i, j) + coupling[1][0] * sum_i a[1][0](i, j)
/// and symmetrically for chain 1. Ties go to the lowest state.
StatePrediction next_state_marginal(const ChmmParams& params,
                                    Fidelity fidelity = Fidelity::kCorrected);

/// Next state per chain given the Viterbi tail states phi:
///   psi[0] = argmax_j coupling[0][0] * a[0][0](phi0, j) + coupling[1][0] * a[1][0](phi1, j)
StatePrediction next_state_viterbi(const ChmmParams& params, const ViterbiTrellis& trellis,
                                   Fidelity fidelity = Fidelity::kCorrected);

/// Midpoint of the most probable emission bin of `state` in `chain`.
double predict_observation(const ChmmParams& params, std::size_t state, std::size_t chain,
                           const Discretizer& d);

/// Share of the coupled transition mass flowing into `state`, used for
/// position sizing. Sums to one over all states of a chain.
double allocation_fraction(const ChmmParams& params, std::size_t state, std::size_t chain);

enum class IndicatorKind { kRsi, kCci };
enum class Side { kNone, kLong, kShort };

inline constexpr double kRsiOversold = 20.0;
inline constexpr double kRsiOverbought = 80.0;
inline constexpr double kCciLongLevel = 105.0;
inline constexpr double kCciShortLevel = -105.0;

struct OpenPositions {
  bool long_open = false;
  bool short_open = false;
};

struct Signal {
  Timestamp timestamp{};
  Side side = Side::kNone;
  std::size_t instrument = 0;
  double size_fraction = 1.0;
  double trigger_value = 0.0;  // SMA of the indicator at the deciding bar
};

/// Compares the SMA over the last `sma_period` values of `series` with the
/// SMA one step earlier. Landing exactly on a level completes a cross.
///   RSI: long on a cross up through 20, short on a cross down through 80.
///   CCI: long on a cross down through 105, short on a cross up through -105.
/// No signal while a position in the same direction is open, or when the
/// history is too short or contains NaN.
Signal generate_signal(IndicatorKind kind, std::span<const double> series,
                       std::size_t sma_period, OpenPositions open = {});

}  // namespace chmm
