#include "qlearn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qlearn/errors.hpp"

namespace qlearn {

bool VerifyReport::all_passed() const {
  return std::ranges::all_of(checks, [](const PropertyCheck& c) { return !c.applicable || c.passed; });
}

std::vector<int> unit_items(const QMatrix& q) {
  std::vector<int> out;
  for (int j = 0; j < q.attributes(); ++j) {
    const Mask e = Mask{1} << j;
    for (int i = 0; i < q.items(); ++i)
      if (q.row(i) == e) {
        out.push_back(i);
        break;
      }
    if (out.size() != static_cast<std::size_t>(j + 1)) return {};
  }
  return out;
}

Eigen::MatrixXd leading_block(const QMatrix& q) {
  const auto units = unit_items(q);
  if (units.empty()) throw ValidationError("leading block needs a complete Q-matrix");
  return build_T(q, ComboOrder::saturated_over(q.items(), units)).values;
}

double block_triangular_defect(const Eigen::MatrixXd& block, int attributes) {
  const auto profiles = profile_order(attributes);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < block.rows(); ++r) {
    const int rc = popcount(profiles[static_cast<std::size_t>(r)].bits);
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      const int cc = popcount(profiles[static_cast<std::size_t>(c)].bits);
      double want = block(r, c);
      if (cc < rc) want = 0.0;
      else if (cc == rc) want = r == c ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(block(r, c) - want));
    }
  }
  return worst;
}

double d_identity_error(const QMatrix& q, const DinaParams& params) {
  params.validate(q.items());
  const auto order = ComboOrder::saturated(q.items());
  const DMatrix d = build_D(params.g, order);
  const Eigen::MatrixXd lhs = d.apply(build_T_tilde(q, params, order).values);
  std::vector<double> cg(params.c.size());
  for (std::size_t i = 0; i < cg.size(); ++i) cg[i] = params.c[i] - params.g[i];
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(lhs.rows(), lhs.cols());
  rhs.rightCols(lhs.cols() - 1) = build_Tc(q, cg, order).values;
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

VerifyReport verify(const QMatrix& q, const DinaParams& params,
                    const ProfileDistribution& p_star, const IdentifiabilityOptions& options) {
  params.validate(q.items());
  VerifyReport report;
  const bool complete = is_complete(q);
  const auto order = ComboOrder::saturated(q.items());

  report.checks.push_back(PropertyCheck{
      "completeness", true, complete, complete ? 1.0 : 0.0,
      complete ? "" : "some unit row e_j is missing from Q"});

  PropertyCheck lead{"leading_block_nonsingular", complete, false, 0.0, ""};
  if (complete) {
    const Eigen::MatrixXd block = leading_block(q);
    const double defect = block_triangular_defect(block, q.attributes());
    lead.margin = min_singular_value(block);
    lead.passed = defect == 0.0 && lead.margin > kRankTolerance;
    if (defect != 0.0) lead.note = "not block upper triangular (defect " + fmt(defect) + ")";
  } else {
    lead.note = "Q is incomplete";
  }
  report.checks.push_back(lead);

  const bool c_nonzero = std::ranges::all_of(params.c, [](double v) { return v != 0.0; });
  PropertyCheck slip{"slip_full_column_rank", complete && c_nonzero, false, 0.0, ""};
  if (slip.applicable) {
    slip.margin = min_singular_value(build_Tc(q, params.c, order).values);
    slip.passed = slip.margin > kRankTolerance;
  } else {
    slip.note = complete ? "some c_i is zero" : "Q is incomplete";
  }
  report.checks.push_back(slip);

  bool separated = true;
  for (std::size_t i = 0; i < params.c.size(); ++i) separated = separated && params.c[i] != params.g[i];
  PropertyCheck aug{"augmented_full_column_rank", complete && separated, false, 0.0, ""};
  if (aug.applicable) {
    aug.margin = min_singular_value(build_T_tilde(q, params, order).values);
    aug.passed = aug.margin > kRankTolerance;
  } else {
    aug.note = complete ? "c_i equals g_i for some item" : "Q is incomplete";
  }
  report.checks.push_back(aug);

  PropertyCheck ident{"d_identity", true, false, d_identity_error(q, params), ""};
  ident.passed = ident.margin <= kDIdentityTolerance;
  report.checks.push_back(ident);

  report.identifiability = check_identifiability(q, params, p_star, options);
  const auto& id = report.identifiability;
  PropertyCheck idc{"identifiability", !id.skipped, id.identifiable(), id.min_delta, ""};
  if (id.skipped) idc.note = "skipped: Q is incomplete";
  else if (!id.flagged.empty())
    idc.note = std::to_string(id.flagged.size()) + " non-equivalent candidates reach delta <= " +
               fmt(options.threshold);
  report.checks.push_back(idc);
  return report;
}

}  // namespace qlearn
