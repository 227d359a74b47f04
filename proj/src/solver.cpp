#include "qlearn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qlearn/errors.hpp"

namespace qlearn {

namespace {

using Index = Eigen::Index;

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

// Minimizer of |M_P z - b| with sum(z) = 1 over the passive columns P.
Eigen::VectorXd solve_passive(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                              const std::vector<Index>& passive) {
  const auto np = static_cast<Index>(passive.size());
  Eigen::VectorXd z(np);
  if (np == 1) {
    z(0) = 1.0;
    return z;
  }
  const Index last = passive.back();
  Eigen::MatrixXd reduced(design.rows(), np - 1);
  for (Index j = 0; j + 1 < np; ++j)
    reduced.col(j) = design.col(passive[static_cast<std::size_t>(j)]) - design.col(last);
  const Eigen::VectorXd rhs = target - design.col(last);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(reduced);
  const Eigen::VectorXd y = cod.solve(rhs);
  z.head(np - 1) = y;
  z(np - 1) = 1.0 - y.sum();
  return z;
}

}  // namespace

LsqSolution simplex_lsq(const LsqProblem& problem, const LsqOptions& options) {
  const auto& design = problem.design;
  const auto& target = problem.target;
  const Index n = design.cols();
  if (n < 1) throw ValidationError("simplex_lsq: design has no columns");
  if (design.rows() != target.size())
    throw ValidationError("simplex_lsq: design rows do not match target length");
  if (!all_finite(design) || !target.allFinite())
    throw ValidationError("simplex_lsq: non-finite entry in problem");

  const int max_iter = options.max_iterations > 0 ? options.max_iterations
                                                  : 50 * static_cast<int>(n);

  // Rounding scale for reduced-gradient comparisons.
  double col_norm = 0.0;
  for (Index j = 0; j < n; ++j) col_norm = std::max(col_norm, design.col(j).norm());
  const double grad_tol = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + col_norm) *
                          (1.0 + col_norm + target.norm());

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<Index> passive;
  if (options.start) {
    const auto& s = *options.start;
    if (s.size() != n || !s.allFinite() || (s.array() < 0.0).any() ||
        std::abs(s.sum() - 1.0) > 1e-9)
      throw ValidationError("simplex_lsq: start point is not on the simplex");
    x = s / s.sum();
    for (Index j = 0; j < n; ++j)
      if (x(j) > 0.0) passive.push_back(j);
  } else {
    Index best = 0;
    double best_res = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) {
      const double r = (design.col(j) - target).squaredNorm();
      if (r < best_res) {
        best_res = r;
        best = j;
      }
    }
    x(best) = 1.0;
    passive.push_back(best);
  }

  LsqSolution sol;
  std::vector<bool> in_passive(static_cast<std::size_t>(n), false);
  for (Index j : passive) in_passive[static_cast<std::size_t>(j)] = true;
  std::vector<bool> rejected(static_cast<std::size_t>(n), false);

  auto rebuild_passive = [&]() {
    passive.clear();
    for (Index j = 0; j < n; ++j)
      if (in_passive[static_cast<std::size_t>(j)]) passive.push_back(j);
  };

  // Moves x to the optimum of the current passive set, dropping coordinates
  // that hit zero along the way.
  auto settle = [&]() {
    while (true) {
      ++sol.iterations;
      const Eigen::VectorXd z = solve_passive(design, target, passive);
      bool interior = true;
      for (std::size_t p = 0; p < passive.size(); ++p)
        if (!(z(static_cast<Index>(p)) > 0.0)) interior = false;
      if (interior) {
        x.setZero();
        for (std::size_t p = 0; p < passive.size(); ++p) x(passive[p]) = z(static_cast<Index>(p));
        return;
      }
      double step = 1.0;
      for (std::size_t p = 0; p < passive.size(); ++p) {
        const double zp = z(static_cast<Index>(p));
        const double xp = x(passive[p]);
        if (zp <= 0.0) step = std::min(step, xp / (xp - zp));
      }
      for (std::size_t p = 0; p < passive.size(); ++p) {
        const Index j = passive[p];
        x(j) += step * (z(static_cast<Index>(p)) - x(j));
        if (x(j) <= 0.0 || (z(static_cast<Index>(p)) <= 0.0 &&
                            x(j) <= 1e3 * std::numeric_limits<double>::epsilon())) {
          x(j) = 0.0;
          in_passive[static_cast<std::size_t>(j)] = false;
        }
      }
      rebuild_passive();
      if (passive.empty()) {
        // Only reachable through rounding; fall back to the largest coordinate.
        Index j = 0;
        x.maxCoeff(&j);
        in_passive[static_cast<std::size_t>(j)] = true;
        rebuild_passive();
      }
      x /= x.sum();
      if (sol.iterations >= max_iter) return;
    }
  };

  settle();
  bool converged = false;
  while (sol.iterations < max_iter) {
    const Eigen::VectorXd w = design.transpose() * (target - design * x);
    double lambda = 0.0;
    for (Index j : passive) lambda += w(j);
    lambda /= static_cast<double>(passive.size());

    Index enter = -1;
    double best_gap = grad_tol;
    for (Index j = 0; j < n; ++j) {
      const auto js = static_cast<std::size_t>(j);
      if (in_passive[js] || rejected[js]) continue;
      const double gap = w(j) - lambda;
      if (gap > best_gap) {
        best_gap = gap;
        enter = j;
      }
    }
    if (enter < 0) {
      converged = true;
      break;
    }

    const double before = (design * x - target).squaredNorm();
    in_passive[static_cast<std::size_t>(enter)] = true;
    rebuild_passive();
    settle();
    const double after = (design * x - target).squaredNorm();
    if (!in_passive[static_cast<std::size_t>(enter)] &&
        after >= before - 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + before)) {
      // The entering column bought nothing; exclude it until x improves.
      rejected[static_cast<std::size_t>(enter)] = true;
    } else {
      std::fill(rejected.begin(), rejected.end(), false);
    }
  }

  sol.status = converged ? LsqStatus::converged : LsqStatus::iteration_cap;
  sol.x = x;
  sol.residual = (design * x - target).norm();
  return sol;
}

}  // namespace qlearn
