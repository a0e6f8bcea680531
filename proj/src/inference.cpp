#include "chmm/inference.hpp"

#include <cmath>
#include <limits>

#include "chmm/error.hpp"

namespace chmm {

double safe_log(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

ForwardTrellis forward(const ChmmParams& params, const ObservationSequence& obs,
                       ForwardMode mode) {
  require_valid(obs, params.n_bins);
  const std::size_t n = params.n_states;
  const std::size_t len = obs.length();

  ForwardTrellis out;
  out.mode = mode;
  out.scale.assign(len, 1.0);
  for (auto& a : out.alpha) a = Matrix(len, n);

  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t c = 0; c < kChains; ++c) {
      const Matrix& b = params.emissions[c];
      const std::size_t o = obs.bins[c][t];
      for (std::size_t j = 0; j < n; ++j) {
        double mass = 0.0;
        if (t == 0) {
          mass = params.priors[c][j];
        } else {
          for (std::size_t from = 0; from < kChains; ++from) {
            const Matrix& a = params.transitions[from][c];
            const Matrix& prev = out.alpha[from];
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += a(i, j) * prev(t - 1, i);
            mass += params.coupling[from][c] * acc;
          }
        }
        out.alpha[c](t, j) = mass * b(j, o);
      }
    }
    if (mode == ForwardMode::kScaled) {
      double total = 0.0;
      for (std::size_t c = 0; c < kChains; ++c) {
        for (double v : out.alpha[c].row(t)) total += v;
      }
      if (total > 0.0) {
        out.scale[t] = total;
        for (std::size_t c = 0; c < kChains; ++c) {
          for (double& v : out.alpha[c].row(t)) v /= total;
        }
        out.log_scale += std::log(total);
      }
    }
  }

  for (std::size_t c = 0; c < kChains; ++c) {
    double mass = 0.0;
    for (double v : out.alpha[c].row(len - 1)) mass += v;
    out.scaled_chain_mass[c] = mass;
    out.chain_log_likelihood[c] = safe_log(mass) + out.log_scale;
    out.chain_likelihood[c] =
        mode == ForwardMode::kLinear ? mass : std::exp(out.chain_log_likelihood[c]);
  }
  out.log_likelihood = out.chain_log_likelihood[0] + out.chain_log_likelihood[1];
  out.likelihood = mode == ForwardMode::kLinear
                       ? out.chain_likelihood[0] * out.chain_likelihood[1]
                       : std::exp(out.log_likelihood);
  return out;
}

ViterbiTrellis coupled_viterbi(const ChmmParams& params, const ObservationSequence& obs) {
  require_valid(obs, params.n_bins);
  const std::size_t n = params.n_states;
  const std::size_t len = obs.length();

  ViterbiTrellis out;
  for (std::size_t c = 0; c < kChains; ++c) {
    Matrix& delta = out.log_delta[c];
    auto& psi = out.psi[c];
    delta = Matrix(len, n);
    psi.assign(len * n, ArgPair{});

    const Matrix& b = params.emissions[c];
    const Matrix& own = params.transitions[0][c];
    const Matrix& other = params.transitions[1][c];

    for (std::size_t i = 0; i < n; ++i) {
      delta(0, i) = safe_log(params.priors[c][i]) + safe_log(b(i, obs.bins[c][0]));
    }
    for (std::size_t t = 1; t < len; ++t) {
      const std::size_t o = obs.bins[c][t];
      for (std::size_t k = 0; k < n; ++k) {
        // Row-major scan over (i, j) with strict improvement: lowest index wins ties.
        double best = -std::numeric_limits<double>::infinity();
        ArgPair arg{};
        bool first = true;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            const double cand =
                delta(t - 1, i) + safe_log(own(i, k)) + safe_log(other(j, k));
            if (first || cand > best) {
              best = cand;
              arg = {i, j};
              first = false;
            }
          }
        }
        delta(t, k) = best + safe_log(b(k, o));
        psi[t * n + k] = arg;
      }
    }

    std::size_t tail = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (delta(len - 1, i) > delta(len - 1, tail)) tail = i;
    }
    out.log_best[c] = delta(len - 1, tail);
    out.best_prob[c] = std::exp(out.log_best[c]);

    auto& path = out.paths[c];
    path.assign(len, 0);
    path[len - 1] = tail;
    for (std::size_t t = len - 1; t > 0; --t) {
      path[t - 1] = psi[t * n + path[t]].i;
    }
  }
  return out;
}

}  // namespace chmm
