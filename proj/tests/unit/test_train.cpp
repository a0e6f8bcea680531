#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "chmm/error.hpp"
#include "chmm/inference.hpp"
#include "chmm/oracle.hpp"
#include "chmm/train.hpp"
#include "test_support.hpp"

using namespace chmm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Central difference of every forward-trellis cell with respect to one raw
// parameter, the row left unnormalized.
Matrix fd_alpha(const ChmmParams& p, const ObservationSequence& obs, const ParamRef& ref,
                std::size_t chain, double h) {
  ChmmParams up = p;
  ChmmParams down = p;
  param_value(up, ref) += h;
  param_value(down, ref) -= h;
  const auto a = forward(up, obs).alpha[chain];
  const auto b = forward(down, obs).alpha[chain];
  Matrix out(a.rows(), a.cols());
  for (std::size_t t = 0; t < a.rows(); ++t) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(t, j) = (a(t, j) - b(t, j)) / (2.0 * h);
  }
  return out;
}

}  // namespace

TEST_CASE("parameter enumeration covers every scalar once") {
  const auto refs = enumerate_params(3, 4);
  CHECK(refs.size() == 2 * 3 + 4 * 9 + 2 * 12 + 4);
  auto p = ChmmParams::uniform(3, 4);
  for (std::size_t k = 0; k < refs.size(); ++k) param_value(p, refs[k]) = static_cast<double>(k);
  for (std::size_t k = 0; k < refs.size(); ++k) CHECK(param_value(p, refs[k]) == static_cast<double>(k));
}

TEST_CASE("trellis derivatives at the first step") {
  Rng rng(4);
  const auto p = test::random_params(3, 2, rng);
  const auto obs = test::random_obs(3, 2, rng);
  const auto res = alpha_gradients(p, obs);
  const auto& g = res.gradients;
  for (std::size_t k = 0; k < g.params().size(); ++k) {
    const auto& r = g.params()[k];
    for (std::size_t c = 0; c < kChains; ++c) {
      for (std::size_t j = 0; j < 3; ++j) {
        const double v = g(k, 0, c, j);
        if (r.family == ParamFamily::kTransition || r.family == ParamFamily::kCoupling) {
          CHECK(v == 0.0);
        } else if (r.family == ParamFamily::kPrior) {
          CHECK(v == (r.chain == c && r.row == j ? p.emissions[c](j, obs.bins[c][0]) : 0.0));
        }
      }
    }
  }
}

TEST_CASE("trellis derivatives match finite differences of forward") {
  Rng rng(2);
  for (int rep = 0; rep < 4; ++rep) {
    const auto p = test::random_params(2, 2, rng);
    const auto obs = test::random_obs(3, 2, rng);
    const auto res = alpha_gradients(p, obs);
    const auto& g = res.gradients;
    for (std::size_t k = 0; k < g.params().size(); ++k) {
      for (std::size_t c = 0; c < kChains; ++c) {
        const Matrix fd = fd_alpha(p, obs, g.params()[k], c, 1e-6);
        for (std::size_t t = 0; t < 3; ++t) {
          for (std::size_t j = 0; j < 2; ++j) {
            const double a = g(k, t, c, j);
            // Cells that do not depend on the parameter are exactly zero on
            // both sides; the floor only admits rounding of such cells.
            CHECK(std::abs(a - fd(t, j)) <= 1e-4 * std::max(std::abs(a), std::abs(fd(t, j))) + 1e-15);
          }
        }
      }
    }
  }
}

TEST_CASE("likelihood gradient of a single-state model in its prior is P / prior") {
  // Linear only for a single step: later steps feed both priors into both
  // chain likelihoods.
  Rng rng(6);
  const auto p = test::random_params(1, 3, rng);
  const auto obs = test::random_obs(1, 3, rng);
  const auto g = likelihood_gradient(p, obs);
  for (std::size_t c = 0; c < kChains; ++c) {
    CHECK_THAT(g.d_priors[c][0], WithinRel(g.likelihood / p.priors[c][0], 1e-12));
  }
}

TEST_CASE("likelihood gradient matches brute-force finite differences") {
  Rng rng(10);
  for (int rep = 0; rep < 12; ++rep) {
    const std::size_t n = 1 + rep % 3;
    const std::size_t m = 2 + rep % 2;
    const auto p = test::random_params(n, m, rng);
    const auto obs = test::random_obs(1 + rep % 4, m, rng);
    const auto g = likelihood_gradient(p, obs);
    for (const auto& ref : enumerate_params(n, m)) {
      CHECK(test::rel_error(g.value(ref), oracle::fd_gradient(p, obs, ref, 1e-6)) < 1e-4);
    }
  }
}

TEST_CASE("scaled gradients are the linear ones divided by exp(log_scale)") {
  Rng rng(14);
  const auto p = test::random_params(3, 3, rng);
  const auto obs = test::random_obs(4, 3, rng);
  const auto lin = likelihood_gradient(p, obs, ForwardMode::kLinear);
  const auto sc = likelihood_gradient(p, obs, ForwardMode::kScaled);
  for (const auto& ref : enumerate_params(3, 3)) {
    CHECK_THAT(sc.value(ref) * std::exp(sc.log_scale), WithinRel(lin.value(ref), 1e-10));
  }
  const auto a = reestimate(p, lin);
  const auto b = reestimate(p, sc);
  for (const auto& ref : enumerate_params(3, 3)) {
    CHECK_THAT(param_value(a, ref), WithinAbs(param_value(b, ref), 1e-12));
  }
}

TEST_CASE("unobserved emission bins have zero gradient") {
  Rng rng(15);
  const auto p = test::random_params(2, 3, rng);
  ObservationSequence obs;
  obs.bins = {std::vector<std::size_t>{0, 1, 0}, std::vector<std::size_t>{2, 2, 1}};
  const auto g = likelihood_gradient(p, obs);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(g.d_emissions[0](j, 2) == 0.0);
    CHECK(g.d_emissions[1](j, 0) == 0.0);
  }
}

TEST_CASE("zero likelihood is a degenerate model") {
  auto p = ChmmParams::uniform(2, 2);
  for (std::size_t j = 0; j < 2; ++j) {
    p.emissions[1](j, 0) = 0.0;
    p.emissions[1](j, 1) = 1.0;
  }
  ObservationSequence obs;
  obs.bins = {std::vector<std::size_t>{0}, std::vector<std::size_t>{0}};
  CHECK_THROWS_AS(likelihood_gradient(p, obs), DegenerateModelError);
}

TEST_CASE("a constant gradient leaves the row unchanged") {
  Rng rng(16);
  const auto p = test::random_params(3, 2, rng);
  const auto obs = test::random_obs(3, 2, rng);
  auto g = likelihood_gradient(p, obs);
  for (std::size_t k = 0; k < 3; ++k) g.d_priors[0][k] = 2.5;
  const auto q = reestimate(p, g);
  for (std::size_t k = 0; k < 3; ++k) CHECK_THAT(q.priors[0][k], WithinAbs(p.priors[0][k], 1e-15));
}

TEST_CASE("single-state models stay at probability one") {
  auto p = ChmmParams::uniform(1, 3);
  Rng rng(18);
  const auto obs = test::random_obs(4, 3, rng);
  const auto q = reestimate(p, likelihood_gradient(p, obs));
  for (std::size_t c = 0; c < kChains; ++c) {
    CHECK(q.priors[c][0] == 1.0);
    for (std::size_t to = 0; to < kChains; ++to) CHECK(q.transitions[c][to](0, 0) == 1.0);
  }
}

TEST_CASE("re-estimation never lowers the likelihood and stays on the simplex") {
  Rng rng(20);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 1 + rep % 3;
    const std::size_t m = 2 + rep % 3;
    const auto p = test::random_params(n, m, rng, rep % 4 == 0 ? 0.2 : 0.0);
    const auto obs = test::random_obs(2 + rep % 5, m, rng);
    const double before = forward(p, obs).likelihood;
    if (before == 0.0) continue;
    const auto q = reestimate(p, likelihood_gradient(p, obs));
    CHECK(validate_params(q).empty());
    CHECK(forward(q, obs).likelihood >= before - 1e-12 * before);
  }
}

TEST_CASE("fit with infinite tolerance returns the starting point") {
  Rng rng(21);
  const auto p = test::random_params(3, 4, rng);
  const auto obs = test::random_obs(6, 4, rng);
  FitConfig cfg;
  cfg.rel_tol = std::numeric_limits<double>::infinity();
  const auto r = fit(p, obs, cfg);
  CHECK(r.params == p);
  REQUIRE(r.log_likelihood_trace.size() == 1);
  CHECK_THAT(r.log_likelihood_trace[0], WithinRel(forward(p, obs).log_likelihood, 1e-12));
  CHECK(r.sweeps_run == 0);
  CHECK(r.stopped_early);
}

TEST_CASE("default fit runs three sweeps") {
  Rng rng(22);
  const auto p = test::random_params(5, 8, rng);
  const auto obs = test::random_obs(4, 8, rng);
  FitConfig cfg;
  cfg.rel_tol = 0.0;
  const auto r = fit(p, obs, cfg);
  CHECK(r.sweeps_run == 3);
  CHECK(r.log_likelihood_trace.size() == 4);
  CHECK_FALSE(r.stopped_early);
  CHECK(FitConfig{}.sweeps == 3);
}

TEST_CASE("fit from a jittered truth has a non-decreasing trace") {
  const auto truth = test::recovery_truth();
  const auto sample = oracle::sample_chmm(truth, 300, 5);
  // A convex mix of two valid models is valid.
  auto start = truth;
  const auto jitter = jittered_uniform(2, 4, 9);
  for (const auto& ref : enumerate_params(2, 4)) {
    param_value(start, ref) = 0.9 * param_value(truth, ref) + 0.1 * param_value(jitter, ref);
  }
  REQUIRE(validate_params(start).empty());
  FitConfig cfg;
  cfg.sweeps = 25;
  cfg.rel_tol = 0.0;
  const auto r = fit(start, sample.observations, cfg);
  for (std::size_t k = 1; k < r.log_likelihood_trace.size(); ++k) {
    CHECK(r.log_likelihood_trace[k] >= r.log_likelihood_trace[k - 1]);
  }
}

TEST_CASE("fit is deterministic") {
  const auto obs = oracle::sample_chmm(test::recovery_truth(), 200, 3).observations;
  FitConfig cfg;
  cfg.sweeps = 10;
  const auto init = jittered_uniform(2, 4, 1);
  CHECK(fit(init, obs, cfg).params == fit(init, obs, cfg).params);
}

TEST_CASE("jittered uniform parameters are valid and seed dependent") {
  const auto a = jittered_uniform(5, 8, 1);
  CHECK(validate_params(a).empty());
  CHECK(a == jittered_uniform(5, 8, 1));
  CHECK_FALSE(a == jittered_uniform(5, 8, 2));
  for (const auto& ref : enumerate_params(5, 8)) {
    if (ref.family == ParamFamily::kCoupling) continue;
    const double v = param_value(a, ref);
    const double u = ref.family == ParamFamily::kEmission ? 1.0 / 8.0 : 1.0 / 5.0;
    CHECK(v > u * 0.95 / 1.05);
    CHECK(v < u * 1.05 / 0.95);
  }
}
