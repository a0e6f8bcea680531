#include "chmm/train.hpp"

#include <cmath>

#include "chmm/error.hpp"
#include "chmm/random.hpp"

namespace chmm {

std::vector<ParamRef> enumerate_params(std::size_t n_states, std::size_t n_bins) {
  std::vector<ParamRef> refs;
  refs.reserve(kChains * (n_states + 2 * n_states * n_states + n_states * n_bins + 2));
  for (std::size_t c = 0; c < kChains; ++c) {
    for (std::size_t i = 0; i < n_states; ++i) refs.push_back({ParamFamily::kPrior, c, 0, i, 0});
  }
  for (std::size_t from = 0; from < kChains; ++from) {
    for (std::size_t to = 0; to < kChains; ++to) {
      for (std::size_t i = 0; i < n_states; ++i) {
        for (std::size_t j = 0; j < n_states; ++j) {
          refs.push_back({ParamFamily::kTransition, from, to, i, j});
        }
      }
    }
  }
  for (std::size_t c = 0; c < kChains; ++c) {
    for (std::size_t j = 0; j < n_states; ++j) {
      for (std::size_t k = 0; k < n_bins; ++k) refs.push_back({ParamFamily::kEmission, c, 0, j, k});
    }
  }
  for (std::size_t from = 0; from < kChains; ++from) {
    for (std::size_t to = 0; to < kChains; ++to) {
      refs.push_back({ParamFamily::kCoupling, from, to, 0, 0});
    }
  }
  return refs;
}

double& param_value(ChmmParams& p, const ParamRef& ref) {
  switch (ref.family) {
    case ParamFamily::kPrior:
      return p.priors[ref.chain][ref.row];
    case ParamFamily::kTransition:
      return p.transitions[ref.chain][ref.to](ref.row, ref.col);
    case ParamFamily::kEmission:
      return p.emissions[ref.chain](ref.row, ref.col);
    case ParamFamily::kCoupling:
      return p.coupling[ref.chain][ref.to];
  }
  throw IndexError("unknown parameter family");
}

double param_value(const ChmmParams& p, const ParamRef& ref) {
  return param_value(const_cast<ChmmParams&>(p), ref);
}

AlphaGradients::AlphaGradients(std::vector<ParamRef> params, std::size_t len,
                               std::size_t n_states)
    : params_(std::move(params)),
      len_(len),
      n_(n_states),
      data_(params_.size() * len * kChains * n_states, 0.0) {}

AlphaGradientResult alpha_gradients(const ChmmParams& params, const ObservationSequence& obs,
                                    ForwardMode mode) {
  require_valid(params);
  ForwardTrellis tr = forward(params, obs, mode);

  const std::size_t n = params.n_states;
  const std::size_t len = obs.length();
  AlphaGradients g(enumerate_params(n, params.n_bins), len, n);
  const auto& refs = g.params();
  const auto& theta = params.coupling;

  // t = 0: only priors and emissions touch the base case.
  for (std::size_t p = 0; p < refs.size(); ++p) {
    const ParamRef& r = refs[p];
    if (r.family == ParamFamily::kPrior) {
      g(p, 0, r.chain, r.row) = params.emissions[r.chain](r.row, obs.bins[r.chain][0]);
    } else if (r.family == ParamFamily::kEmission && obs.bins[r.chain][0] == r.col) {
      g(p, 0, r.chain, r.row) = params.priors[r.chain][r.row];
    }
    for (std::size_t c = 0; c < kChains; ++c) {
      for (std::size_t j = 0; j < n; ++j) g(p, 0, c, j) /= tr.scale[0];
    }
  }

  // inflow[from][to][j] = sum_i a[from][to](i, j) * alpha[from](t-1, i)
  std::array<std::array<std::vector<double>, kChains>, kChains> inflow;
  for (auto& row : inflow) {
    for (auto& v : row) v.assign(n, 0.0);
  }

  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t from = 0; from < kChains; ++from) {
      for (std::size_t to = 0; to < kChains; ++to) {
        const Matrix& a = params.transitions[from][to];
        for (std::size_t j = 0; j < n; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < n; ++i) acc += a(i, j) * tr.alpha[from](t - 1, i);
          inflow[from][to][j] = acc;
        }
      }
    }

    for (std::size_t p = 0; p < refs.size(); ++p) {
      // Propagation through the recursion (shared by every family).
      for (std::size_t c = 0; c < kChains; ++c) {
        const std::size_t o = obs.bins[c][t];
        for (std::size_t j = 0; j < n; ++j) {
          double mass = 0.0;
          for (std::size_t from = 0; from < kChains; ++from) {
            const Matrix& a = params.transitions[from][c];
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += a(i, j) * g(p, t - 1, from, i);
            mass += theta[from][c] * acc;
          }
          g(p, t, c, j) = params.emissions[c](j, o) * mass;
        }
      }

      // Direct dependence of step t on the parameter itself.
      const ParamRef& r = refs[p];
      switch (r.family) {
        case ParamFamily::kPrior:
          break;
        case ParamFamily::kTransition: {
          const std::size_t c = r.to;
          const double b = params.emissions[c](r.col, obs.bins[c][t]);
          g(p, t, c, r.col) += theta[r.chain][c] * b * tr.alpha[r.chain](t - 1, r.row);
          break;
        }
        case ParamFamily::kEmission: {
          const std::size_t c = r.chain;
          if (obs.bins[c][t] == r.col) {
            double mass = 0.0;
            for (std::size_t from = 0; from < kChains; ++from) {
              mass += theta[from][c] * inflow[from][c][r.row];
            }
            g(p, t, c, r.row) += mass;
          }
          break;
        }
        case ParamFamily::kCoupling: {
          const std::size_t c = r.to;
          const std::size_t o = obs.bins[c][t];
          for (std::size_t j = 0; j < n; ++j) {
            g(p, t, c, j) += params.emissions[c](j, o) * inflow[r.chain][c][j];
          }
          break;
        }
      }

      for (std::size_t c = 0; c < kChains; ++c) {
        for (std::size_t j = 0; j < n; ++j) g(p, t, c, j) /= tr.scale[t];
      }
    }
  }

  return {std::move(tr), std::move(g)};
}

double GradientSet::value(const ParamRef& ref) const {
  switch (ref.family) {
    case ParamFamily::kPrior:
      return d_priors[ref.chain][ref.row];
    case ParamFamily::kTransition:
      return d_transitions[ref.chain][ref.to](ref.row, ref.col);
    case ParamFamily::kEmission:
      return d_emissions[ref.chain](ref.row, ref.col);
    case ParamFamily::kCoupling:
      return d_coupling[ref.chain][ref.to];
  }
  throw IndexError("unknown parameter family");
}

GradientSet likelihood_gradient(const ChmmParams& params, const ObservationSequence& obs,
                                ForwardMode mode) {
  const AlphaGradientResult ag = alpha_gradients(params, obs, mode);
  const ForwardTrellis& tr = ag.trellis;
  for (std::size_t c = 0; c < kChains; ++c) {
    if (!(tr.scaled_chain_mass[c] > 0.0)) {
      throw DegenerateModelError("likelihood of chain " + std::to_string(c + 1) +
                                 " is zero for this observation window");
    }
  }

  const std::size_t n = params.n_states;
  const std::size_t last = obs.length() - 1;
  GradientSet out;
  for (std::size_t c = 0; c < kChains; ++c) {
    out.d_priors[c].assign(n, 0.0);
    out.d_emissions[c] = Matrix(n, params.n_bins);
    for (std::size_t to = 0; to < kChains; ++to) out.d_transitions[c][to] = Matrix(n, n);
  }

  // dP/dw = sum_c (P / P^(c)) sum_j d alpha[c](T, j)/dw, with P = P^(1) P^(2).
  const auto& refs = ag.gradients.params();
  for (std::size_t p = 0; p < refs.size(); ++p) {
    double total = 0.0;
    for (std::size_t c = 0; c < kChains; ++c) {
      double d_chain = 0.0;
      for (std::size_t j = 0; j < n; ++j) d_chain += ag.gradients(p, last, c, j);
      total += tr.scaled_chain_mass[1 - c] * d_chain;
    }
    const ParamRef& r = refs[p];
    switch (r.family) {
      case ParamFamily::kPrior:
        out.d_priors[r.chain][r.row] = total;
        break;
      case ParamFamily::kTransition:
        out.d_transitions[r.chain][r.to](r.row, r.col) = total;
        break;
      case ParamFamily::kEmission:
        out.d_emissions[r.chain](r.row, r.col) = total;
        break;
      case ParamFamily::kCoupling:
        out.d_coupling[r.chain][r.to] = total;
        break;
    }
  }
  out.log_scale = 2.0 * tr.log_scale;
  out.likelihood = tr.likelihood;
  out.log_likelihood = tr.log_likelihood;
  return out;
}

namespace {

// w <- w * g / sum(w * g) over one simplex row; a zero normalizer keeps the row.
template <typename Get>
void grow_row(std::size_t size, Get&& entry) {
  double norm = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    auto [w, grad] = entry(k);
    norm += w * grad;
  }
  if (!(norm > 0.0) || !std::isfinite(norm)) return;
  for (std::size_t k = 0; k < size; ++k) {
    auto [w, grad] = entry(k);
    w = w * grad / norm;
  }
}

struct Slot {
  double& w;
  double grad;
};

}  // namespace

ChmmParams reestimate(const ChmmParams& params, const GradientSet& grads) {
  require_valid(params);
  ChmmParams out = params;
  const std::size_t n = params.n_states;
  for (std::size_t c = 0; c < kChains; ++c) {
    grow_row(n, [&](std::size_t k) {
      return Slot{out.priors[c][k], grads.d_priors[c][k]};
    });
    for (std::size_t to = 0; to < kChains; ++to) {
      for (std::size_t i = 0; i < n; ++i) {
        grow_row(n, [&](std::size_t k) {
          return Slot{out.transitions[c][to](i, k), grads.d_transitions[c][to](i, k)};
        });
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      grow_row(params.n_bins, [&](std::size_t k) {
        return Slot{out.emissions[c](j, k), grads.d_emissions[c](j, k)};
      });
    }
    // Coupling weights normalize down the column: sum over source chains.
    grow_row(kChains, [&](std::size_t from) {
      return Slot{out.coupling[from][c], grads.d_coupling[from][c]};
    });
  }
  return out;
}

FitResult fit(const ChmmParams& initial, const ObservationSequence& obs, const FitConfig& cfg) {
  require_valid(initial);
  FitResult result{initial, {}, 0, false};

  GradientSet current = likelihood_gradient(initial, obs, ForwardMode::kScaled);
  result.log_likelihood_trace.push_back(current.log_likelihood);

  for (std::size_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
    ChmmParams candidate = reestimate(result.params, current);
    GradientSet next = likelihood_gradient(candidate, obs, ForwardMode::kScaled);
    const double gain = std::expm1(next.log_likelihood - current.log_likelihood);
    if (!(gain >= cfg.rel_tol)) {
      result.stopped_early = true;
      break;
    }
    result.params = std::move(candidate);
    current = std::move(next);
    result.log_likelihood_trace.push_back(current.log_likelihood);
    ++result.sweeps_run;
  }
  return result;
}

ChmmParams jittered_uniform(std::size_t n_states, std::size_t n_bins, std::uint64_t seed) {
  ChmmParams p = ChmmParams::uniform(n_states, n_bins);
  Rng rng(seed);
  auto jitter = [&](std::span<double> row) {
    double sum = 0.0;
    for (double& v : row) {
      v *= rng.uniform(0.95, 1.05);
      sum += v;
    }
    for (double& v : row) v /= sum;
  };
  for (std::size_t c = 0; c < kChains; ++c) {
    jitter(p.priors[c]);
    for (std::size_t to = 0; to < kChains; ++to) {
      for (std::size_t i = 0; i < n_states; ++i) jitter(p.transitions[c][to].row(i));
    }
    for (std::size_t j = 0; j < n_states; ++j) jitter(p.emissions[c].row(j));
  }
  for (std::size_t to = 0; to < kChains; ++to) {
    std::array<double, kChains> column{p.coupling[0][to], p.coupling[1][to]};
    jitter(column);
    p.coupling[0][to] = column[0];
    p.coupling[1][to] = column[1];
  }
  return p;
}

}  // namespace chmm
