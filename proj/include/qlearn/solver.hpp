#pragma once

// Least squares over the probability simplex:
//
//   minimize |M x - b|  subject to  x >= 0, sum(x) = 1.
//
// Active-set method in the style of Lawson-Hanson NNLS, with the equality
// constraint removed by eliminating the last passive coordinate of each
// subproblem. Rank-deficient subproblems take the minimum-norm solution.

#include <Eigen/Dense>
#include <optional>

namespace qlearn {

struct LsqProblem {
  Eigen::MatrixXd design;  ///< rows = combos, columns = simplex variables
  Eigen::VectorXd target;
};

enum class LsqStatus { converged, iteration_cap };

struct LsqSolution {
  Eigen::VectorXd x;
  double residual = 0.0;  ///< Euclidean norm of design * x - target
  int iterations = 0;
  LsqStatus status = LsqStatus::converged;
};

struct LsqOptions {
  /// Feasible starting point; defaults to the best simplex vertex.
  std::optional<Eigen::VectorXd> start;
  /// 0 selects 50 * (number of variables).
  int max_iterations = 0;
};

/// Throws ValidationError on non-finite input, an empty design, mismatched
/// shapes, or an infeasible start.
LsqSolution simplex_lsq(const LsqProblem& problem, const LsqOptions& options = {});

}  // namespace qlearn
