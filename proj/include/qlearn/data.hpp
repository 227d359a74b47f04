#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "qlearn/core.hpp"
#include "qlearn/tmatrix.hpp"

namespace qlearn {

/// Probabilities over all 2^k attribute profiles, indexed by profile mask
/// (entry 0 is the all-zero profile).
struct ProfileDistribution {
  int attributes = 0;
  std::vector<double> probs;

  static ProfileDistribution uniform(int attributes);
  static ProfileDistribution point_mass(int attributes, AttributeProfile at);

  double operator[](AttributeProfile a) const { return probs.at(a.bits); }

  /// Nonnegative, finite, sums to 1 within `tol`. Throws ValidationError
  /// naming the offending sum otherwise.
  void validate(double tol = 1e-9) const;
  /// Every profile, including the zero profile, has positive mass.
  bool strictly_positive() const;

  /// Layout shared with simplex-lsq solutions: p_0 first, then the nonzero
  /// profiles in profile_order().
  Eigen::VectorXd to_simplex_vector() const;
  static ProfileDistribution from_simplex_vector(int attributes, const Eigen::VectorXd& x);

  /// Relabels attributes: attribute j of the result is attribute perm[j] here.
  ProfileDistribution permute_attributes(std::span<const int> perm) const;
};

/// Empirical rate N_S / N of subjects answering every item of S positively,
/// one entry per combo of `order`.
struct AlphaVector {
  ComboOrder order;
  Eigen::VectorXd rates;
  std::size_t n_subjects = 0;
};

struct ResponseData {
  int items = 0;
  /// Bit i of rows[r] is subject r's response to item i + 1.
  std::vector<Mask> rows;

  std::size_t n_subjects() const { return rows.size(); }
  /// Responses restricted to the listed items; item `items[b]` becomes bit b.
  ResponseData select_items(std::span<const int> items) const;
};

}  // namespace qlearn
