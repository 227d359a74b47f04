#pragma once

// T-matrix family. Rows are labelled by item combinations, columns by
// nonzero attribute profiles; both label sets use a fixed
// cardinality-then-lexicographic order.

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qlearn/core.hpp"

namespace qlearn {

/// Saturated T-matrices are refused above this many items.
inline constexpr int kMaxSaturatedItems = 14;

class ComboOrder {
 public:
  /// Validates: combos nonempty, inside the m items, no duplicates.
  ComboOrder(int items, std::vector<ItemCombo> combos);

  /// All 2^m - 1 nonempty combos.
  static ComboOrder saturated(int items);
  /// The m single-item combos.
  static ComboOrder singles(int items);
  /// All nonempty combos of the listed items (zero-based), ordered as the
  /// subsets of positions in `subset`. With subset[j] an item whose row is
  /// e_j, these are the rows of the block-triangular leading block of T(Q).
  static ComboOrder saturated_over(int items, std::span<const int> subset);

  int items() const { return items_; }
  std::size_t size() const { return combos_.size(); }
  const ItemCombo& operator[](std::size_t i) const { return combos_[i]; }
  std::span<const ItemCombo> combos() const { return combos_; }
  bool is_saturated() const;

  /// Row index of `combo`, or -1.
  int index_of(ItemCombo combo) const;

  std::vector<std::string> labels() const;

  friend bool operator==(const ComboOrder& a, const ComboOrder& b) {
    return a.items_ == b.items_ && a.combos_ == b.combos_;
  }

 private:
  int items_;
  std::vector<ItemCombo> combos_;
  std::vector<int> index_;  // by combo mask
};

/// Nonzero profiles over k attributes, cardinality then lexicographic.
std::vector<AttributeProfile> profile_order(int attributes);

struct DinaParams {
  std::vector<double> c;  ///< 1 - slipping probability, per item
  std::vector<double> g;  ///< guessing probability, per item

  static DinaParams noiseless(int items);
  static DinaParams uniform(int items, double c, double g);

  int items() const { return static_cast<int>(c.size()); }
  /// Lengths equal `items`, entries finite and in [0, 1].
  void validate(int items) const;
  /// Additionally c_i != g_i for every item.
  void validate_separated(int items) const;
};

enum class TVariant { plain, slip, slip_guess, augmented };

std::string to_string(TVariant v);
TVariant parse_variant(std::string_view name);

struct TMatrix {
  ComboOrder rows;
  int attributes = 0;
  TVariant variant = TVariant::plain;
  /// For the augmented variant: one extra leading GUESS column and one extra
  /// trailing ONES row around the T_{c,g} block.
  Eigen::MatrixXd values;

  std::vector<std::string> row_labels() const;
  std::vector<std::string> column_labels() const;
};

/// Binary T(Q): entry (S, A) = 1 iff profile A masters every attribute the
/// items of S require.
TMatrix build_T(const QMatrix& q, const ComboOrder& order);

/// T_c(Q) = D_c T(Q), D_c diagonal with entry prod_{i in S} c_i.
TMatrix build_Tc(const QMatrix& q, std::span<const double> c, const ComboOrder& order);

/// Same matrix built as element-wise products of the single-item rows
/// c_i B_Q(I_i). Agrees exactly with build_Tc.
TMatrix build_Tc_by_products(const QMatrix& q, std::span<const double> c,
                             const ComboOrder& order);

/// Row S is the element-wise product over i in S of g_i E + (c_i - g_i) B_Q(I_i).
TMatrix build_Tcg(const QMatrix& q, const DinaParams& params, const ComboOrder& order);

/// Entry for combo S is prod_{i in S} g_i.
Eigen::VectorXd guess_vector(std::span<const double> g, const ComboOrder& order);

/// [[guess_vector, T_{c,g}], [1, ones]]; (|order| + 1) x 2^k.
TMatrix build_T_tilde(const QMatrix& q, const DinaParams& params, const ComboOrder& order);

/// Row transform D with D * T~_{c,g}(Q) = (0 | T_{c-g}(Q)) for every Q and c.
/// Depends on g only. Rows are labelled by the saturated combo order;
/// columns by the same combos followed by a final ONES column.
///
/// D[S, U] = (-1)^{|S \ U|} prod_{i in S \ U} g_i for U a subset of S
/// (U empty maps to the ONES column), zero otherwise. Each row has 2^{|S|}
/// nonzeros, so rows are produced on demand and dense() is only offered for
/// small m.
class DMatrix {
 public:
  /// Throws ValidationError unless `order` is saturated.
  DMatrix(std::vector<double> g, ComboOrder order);

  int items() const { return order_.items(); }
  std::size_t rows() const { return order_.size(); }
  std::size_t cols() const { return order_.size() + 1; }
  const ComboOrder& order() const { return order_; }

  /// Column index for a combo; the empty combo maps to the ONES column.
  std::size_t column_of(ItemCombo combo) const;

  Eigen::RowVectorXd row(ItemCombo combo) const;
  /// Calls f(column, coefficient) for each nonzero of row `combo`.
  template <typename F>
  void for_each_nonzero(ItemCombo combo, F&& f) const;

  /// Refuses m > 12.
  Eigen::MatrixXd dense() const;
  /// D * rhs without materializing D.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& rhs) const;

 private:
  std::vector<double> g_;
  ComboOrder order_;
};

DMatrix build_D(std::span<const double> g, const ComboOrder& order);

/// (a_g, a_*g): the rows of `d` labelled by `cover` and by cover + {item}.
std::pair<Eigen::RowVectorXd, Eigen::RowVectorXd> moment_rows(const DMatrix& d,
                                                               ItemCombo cover, int item);

/// Minimum singular value of a dense matrix (0 for an empty matrix).
double min_singular_value(const Eigen::MatrixXd& m);

template <typename F>
void DMatrix::for_each_nonzero(ItemCombo combo, F&& f) const {
  // Walk every subset U of S; coefficient is the signed product of g over
  // the complement S \ U.
  const Mask s = combo.bits;
  Mask u = s;
  while (true) {
    const Mask rest = s & ~u;
    double coef = 1.0;
    for (int i = 0; i < items(); ++i)
      if ((rest >> i) & 1U) coef *= -g_[static_cast<std::size_t>(i)];
    f(column_of(ItemCombo{u}), coef);
    if (u == 0) break;
    u = (u - 1) & s;
  }
}

}  // namespace qlearn
