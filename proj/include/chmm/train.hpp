#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "chmm/inference.hpp"
#include "chmm/matrix.hpp"
#include "chmm/params.hpp"

namespace chmm {

enum class ParamFamily { kPrior, kTransition, kEmission, kCoupling };

/// Names one scalar parameter.
///   kPrior:      priors[chain][row]
///   kTransition: transitions[chain][to](row, col)
///   kEmission:   emissions[chain](row, col)      (row = state, col = bin)
///   kCoupling:   coupling[chain][to]
struct ParamRef {
  ParamFamily family = ParamFamily::kPrior;
  std::size_t chain = 0;
  std::size_t to = 0;
  std::size_t row = 0;
  std::size_t col = 0;

  bool operator==(const ParamRef&) const = default;
};

/// Fixed enumeration of every free parameter: priors, transitions, emissions,
/// then coupling, each in chain-major, row-major order.
std::vector<ParamRef> enumerate_params(std::size_t n_states, std::size_t n_bins);

double& param_value(ChmmParams& params, const ParamRef& ref);
double param_value(const ChmmParams& params, const ParamRef& ref);

/// d alpha[c](t, j) / d w for every enumerated parameter w, produced by
/// forward-mode differentiation of the coupled recursion. Stored with the
/// same per-step scaling as the forward trellis it was built from.
class AlphaGradients {
 public:
  AlphaGradients(std::vector<ParamRef> params, std::size_t len, std::size_t n_states);

  const std::vector<ParamRef>& params() const { return params_; }
  std::size_t length() const { return len_; }
  std::size_t n_states() const { return n_; }

  double operator()(std::size_t p, std::size_t t, std::size_t chain, std::size_t j) const {
    return data_[index(p, t, chain, j)];
  }
  double& operator()(std::size_t p, std::size_t t, std::size_t chain, std::size_t j) {
    return data_[index(p, t, chain, j)];
  }

 private:
  std::size_t index(std::size_t p, std::size_t t, std::size_t chain, std::size_t j) const {
    return ((p * len_ + t) * kChains + chain) * n_ + j;
  }

  std::vector<ParamRef> params_;
  std::size_t len_;
  std::size_t n_;
  std::vector<double> data_;
};

struct AlphaGradientResult {
  ForwardTrellis trellis;
  AlphaGradients gradients;
};

AlphaGradientResult alpha_gradients(const ChmmParams& params, const ObservationSequence& obs,
                                    ForwardMode mode = ForwardMode::kLinear);

/// dP/dw for every parameter, shaped like ChmmParams. In scaled mode the
/// stored values are the true gradient divided by exp(log_scale); the
/// multiplicative update is invariant to that factor.
struct GradientSet {
  std::array<std::vector<double>, kChains> d_priors;
  std::array<std::array<Matrix, kChains>, kChains> d_transitions;
  std::array<Matrix, kChains> d_emissions;
  std::array<std::array<double, kChains>, kChains> d_coupling{};
  double log_scale = 0.0;

  double likelihood = 0.0;       // P at the point of evaluation
  double log_likelihood = 0.0;

  double value(const ParamRef& ref) const;
};

/// Throws DegenerateModelError when either chain likelihood is zero.
GradientSet likelihood_gradient(const ChmmParams& params, const ObservationSequence& obs,
                                ForwardMode mode = ForwardMode::kLinear);

/// One multiplicative growth-transform step: every simplex row is replaced by
/// w * dP/dw normalized over the row. Rows whose normalizer is zero are kept.
ChmmParams reestimate(const ChmmParams& params, const GradientSet& grads);

struct FitConfig {
  std::size_t sweeps = 3;
  double rel_tol = 1e-6;
  bool warm_start = true;
  std::uint64_t seed = 0;
};

struct FitResult {
  ChmmParams params;
  std::vector<double> log_likelihood_trace;  // initial value first, one entry per accepted sweep
  std::size_t sweeps_run = 0;                // accepted updates
  bool stopped_early = false;
};

/// Repeated gradient + re-estimation. A sweep whose relative likelihood gain
/// is below `rel_tol` is discarded and the loop stops.
FitResult fit(const ChmmParams& initial, const ObservationSequence& obs, const FitConfig& cfg);

/// Uniform parameters with every entry multiplied by seeded jitter in
/// [0.95, 1.05] and renormalized. Used when no warm start is available.
ChmmParams jittered_uniform(std::size_t n_states, std::size_t n_bins, std::uint64_t seed);

}  // namespace chmm
