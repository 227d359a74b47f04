#pragma once

// Numeric property checks on a single Q-matrix: rank structure of the
// T-matrix family, the D-matrix identity, and the identifiability scan.

#include <string>
#include <vector>

#include "qlearn/estimator.hpp"

namespace qlearn {

struct PropertyCheck {
  std::string name;
  bool applicable = true;
  bool passed = false;
  double margin = 0.0;  ///< measured quantity, e.g. min singular value or max error
  std::string note;
};

struct VerifyReport {
  std::vector<PropertyCheck> checks;
  IdentifiabilityReport identifiability;
  /// Every applicable check passed.
  bool all_passed() const;
};

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kDIdentityTolerance = 1e-12;

/// Items u_1..u_k whose rows are the unit rows e_1..e_k (first match each),
/// or empty when q is incomplete.
std::vector<int> unit_items(const QMatrix& q);

/// Rows of T(q) for the combos of the unit items, ordered by the attribute
/// subsets they realize, against all profile columns: the square leading
/// block of the complete-Q arrangement.
Eigen::MatrixXd leading_block(const QMatrix& q);

/// Max deviation of `block` from upper block-triangular form with identity
/// diagonal blocks, blocks being profile cardinalities.
double block_triangular_defect(const Eigen::MatrixXd& block, int attributes);

/// max |D T~_{c,g}(q) - (0 | T_{c-g}(q))| on the saturated order.
double d_identity_error(const QMatrix& q, const DinaParams& params);

VerifyReport verify(const QMatrix& q, const DinaParams& params,
                    const ProfileDistribution& p_star,
                    const IdentifiabilityOptions& options = {});

}  // namespace qlearn
