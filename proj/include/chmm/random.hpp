#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace chmm {

/// Seeded generator with distribution code written out here, so sequences
/// are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal();

  /// Index drawn from unnormalized nonnegative weights. The last index with
  /// positive weight absorbs rounding.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace chmm
