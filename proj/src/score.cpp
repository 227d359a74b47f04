#include "qlearn/errors.hpp"
#include "qlearn/estimator.hpp"

namespace qlearn {

Eigen::MatrixXd score_design(const QMatrix& q, const DinaParams& params, const ComboOrder& order) {
  const TMatrix tcg = build_Tcg(q, params, order);
  Eigen::MatrixXd design(tcg.values.rows(), tcg.values.cols() + 1);
  design.col(0) = guess_vector(params.g, order);
  design.rightCols(tcg.values.cols()) = tcg.values;
  return design;
}

LsqSolution fit_profiles(const QMatrix& q, const AlphaVector& alpha, const DinaParams& params) {
  if (alpha.order.items() != q.items())
    throw ValidationError("alpha vector and Q-matrix disagree on the number of items");
  params.validate(q.items());
  return simplex_lsq(LsqProblem{score_design(q, params, alpha.order), alpha.rates});
}

double score(const QMatrix& q, const AlphaVector& alpha, const DinaParams& params) {
  return fit_profiles(q, alpha, params).residual;
}

ProfileDistribution estimate_p(const QMatrix& q, const AlphaVector& alpha,
                               const DinaParams& params) {
  const auto fit = fit_profiles(q, alpha, params);
  return ProfileDistribution::from_simplex_vector(q.attributes(), fit.x);
}

AlphaVector population_alpha(const QMatrix& q, const DinaParams& params,
                             const ProfileDistribution& p_star) {
  if (p_star.attributes != q.attributes())
    throw ValidationError("p* and Q-matrix disagree on the number of attributes");
  params.validate(q.items());
  const auto order = ComboOrder::saturated(q.items());
  const TMatrix tt = build_T_tilde(q, params, order);
  const Eigen::VectorXd full = tt.values * p_star.to_simplex_vector();
  return AlphaVector{order, full.head(static_cast<Eigen::Index>(order.size())), 0};
}

}  // namespace qlearn
