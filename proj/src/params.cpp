#include "chmm/params.hpp"

#include <cmath>
#include <sstream>

#include "chmm/error.hpp"

namespace chmm {

namespace {

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

std::string chain_pair(std::size_t from, std::size_t to) {
  return "(" + std::to_string(from + 1) + "," + std::to_string(to + 1) + ")";
}

void check_simplex(std::span<const double> row, ViolationKind kind,
                   const std::string& label, ValidationReport& report) {
  double sum = 0.0;
  bool in_range = true;
  for (double x : row) {
    sum += x;
    in_range = in_range && is_probability(x);
  }
  if (!in_range) {
    report.push_back({ViolationKind::kRange, label + " has an entry outside [0, 1]"});
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << label << " sums to " << sum;
    report.push_back({kind, os.str()});
  }
}

bool shape_ok(const ChmmParams& p, ValidationReport& report) {
  const std::size_t n = p.n_states;
  const std::size_t m = p.n_bins;
  if (n == 0 || m == 0) {
    report.push_back({ViolationKind::kShape, "n_states and n_bins must be positive"});
    return false;
  }
  bool ok = true;
  for (std::size_t c = 0; c < kChains; ++c) {
    if (p.priors[c].size() != n) {
      report.push_back({ViolationKind::kShape,
                        "prior of chain " + std::to_string(c + 1) + " has wrong length"});
      ok = false;
    }
    if (p.emissions[c].rows() != n || p.emissions[c].cols() != m) {
      report.push_back({ViolationKind::kShape,
                        "emission matrix of chain " + std::to_string(c + 1) + " is not N x M"});
      ok = false;
    }
    for (std::size_t from = 0; from < kChains; ++from) {
      const Matrix& a = p.transitions[from][c];
      if (a.rows() != n || a.cols() != n) {
        report.push_back({ViolationKind::kShape,
                          "transition matrix " + chain_pair(from, c) + " is not N x N"});
        ok = false;
      }
    }
  }
  return ok;
}

}  // namespace

ChmmParams ChmmParams::uniform(std::size_t n_states, std::size_t n_bins) {
  ChmmParams p;
  p.n_states = n_states;
  p.n_bins = n_bins;
  const double pn = 1.0 / static_cast<double>(n_states);
  const double pm = 1.0 / static_cast<double>(n_bins);
  for (std::size_t c = 0; c < kChains; ++c) {
    p.priors[c].assign(n_states, pn);
    p.emissions[c] = Matrix(n_states, n_bins, pm);
    for (std::size_t from = 0; from < kChains; ++from) {
      p.transitions[from][c] = Matrix(n_states, n_states, pn);
      p.coupling[from][c] = 0.5;
    }
  }
  return p;
}

ValidationReport validate_params(const ChmmParams& p) {
  ValidationReport report;
  if (!shape_ok(p, report)) return report;

  for (std::size_t c = 0; c < kChains; ++c) {
    const std::string chain = std::to_string(c + 1);
    check_simplex(p.priors[c], ViolationKind::kPrior, "prior of chain " + chain, report);
    for (std::size_t from = 0; from < kChains; ++from) {
      const Matrix& a = p.transitions[from][c];
      for (std::size_t i = 0; i < p.n_states; ++i) {
        check_simplex(a.row(i), ViolationKind::kTransition,
                      "transition matrix " + chain_pair(from, c) + " row " + std::to_string(i),
                      report);
      }
    }
    for (std::size_t j = 0; j < p.n_states; ++j) {
      check_simplex(p.emissions[c].row(j), ViolationKind::kEmission,
                    "emission matrix of chain " + chain + " row " + std::to_string(j), report);
    }
    const std::array<double, kChains> column{p.coupling[0][c], p.coupling[1][c]};
    check_simplex(column, ViolationKind::kCoupling, "coupling column " + chain, report);
  }
  return report;
}

void require_valid(const ChmmParams& params) {
  const ValidationReport report = validate_params(params);
  if (!report.empty()) throw Error("invalid parameters: " + report.front().message);
}

void require_valid(const ObservationSequence& obs, std::size_t n_bins) {
  if (obs.bins[0].size() != obs.bins[1].size()) {
    throw Error("observation chains differ in length");
  }
  if (obs.length() == 0) throw Error("observation window is empty");
  for (std::size_t c = 0; c < kChains; ++c) {
    for (std::size_t k : obs.bins[c]) {
      if (k >= n_bins) {
        throw IndexError("observation bin " + std::to_string(k) + " out of range for M = " +
                         std::to_string(n_bins));
      }
    }
  }
}

double joint_transition(const ChmmParams& params, std::size_t chain, std::size_t prev0,
                        std::size_t prev1, std::size_t target) {
  const std::size_t n = params.n_states;
  if (chain >= kChains || prev0 >= n || prev1 >= n || target >= n) {
    throw IndexError("joint_transition index out of range");
  }
  return params.coupling[0][chain] * params.transitions[0][chain](prev0, target) +
         params.coupling[1][chain] * params.transitions[1][chain](prev1, target);
}

}  // namespace chmm
