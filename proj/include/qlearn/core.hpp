#pragma once

// Q-matrix algebra: item/attribute bit sets, capability, completeness,
// equivalence up to column permutation, canonical forms and candidate
// enumeration.
//
// Bit conventions used throughout the library:
//   * an attribute profile is a k-bit mask, bit j set iff attribute j+1 is
//     mastered;
//   * a Q-matrix row is a k-bit mask in the same convention;
//   * an item combination is an m-bit mask, bit i set iff item i+1 is in it.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qlearn {

inline constexpr int kMaxItems = 20;
inline constexpr int kMaxAttributes = 10;
inline constexpr std::uint64_t kDefaultCandidateBudget = 10'000'000;

using Mask = std::uint32_t;

struct AttributeProfile {
  Mask bits = 0;
  friend auto operator<=>(const AttributeProfile&, const AttributeProfile&) = default;
};

struct ItemCombo {
  Mask bits = 0;

  int size() const;
  bool contains(int item) const { return (bits >> item) & 1U; }
  friend auto operator<=>(const ItemCombo&, const ItemCombo&) = default;
};

int popcount(Mask bits);

/// All nonempty subsets of {0..n-1}, ordered by cardinality and then
/// lexicographically by their sorted element indices.
std::vector<Mask> subsets_by_cardinality(int n);

/// "A^1...A^k" bitstring, e.g. "10" for the profile mastering attribute 1 only.
std::string profile_label(AttributeProfile profile, int k);
/// Comma-joined one-based item indices, e.g. "1,3".
std::string combo_label(ItemCombo combo);

AttributeProfile parse_profile_label(std::string_view label, int k);

class QMatrix {
 public:
  /// `rows[i]` is the attribute mask of item i. Throws ValidationError on a
  /// zero row, a bit outside k, or dimensions outside the supported range.
  QMatrix(int items, int attributes, std::vector<Mask> rows);

  /// Builds from bit-row strings such as {"10", "01", "11"}.
  static QMatrix from_strings(std::span<const std::string> rows);
  static QMatrix from_strings(std::initializer_list<std::string_view> rows);
  static QMatrix identity(int k);
  /// Inverse of column_value(): `columns[j]` holds column j as an m-bit
  /// integer with item 1 in the most significant position.
  static QMatrix from_column_values(int items, int attributes,
                                    std::span<const std::uint32_t> columns);

  int items() const { return items_; }
  int attributes() const { return attributes_; }

  Mask row(int item) const { return rows_.at(static_cast<std::size_t>(item)); }
  std::span<const Mask> rows() const { return rows_; }
  bool at(int item, int attribute) const { return (row(item) >> attribute) & 1U; }

  /// Column `attribute` read as an m-bit integer, item 1 most significant.
  std::uint32_t column_value(int attribute) const;

  /// Union of the attribute masks of the items in `combo`.
  Mask required(ItemCombo combo) const;

  /// Column j of the result is column perm[j] of this matrix.
  QMatrix permute_columns(std::span<const int> perm) const;
  QMatrix with_row(int item, Mask row) const;
  /// Rows of the listed items, in the listed order.
  QMatrix select_items(std::span<const int> items) const;

  std::vector<std::string> row_strings() const;

  friend bool operator==(const QMatrix&, const QMatrix&) = default;
  /// Total order used for deterministic tie-breaking: items, attributes,
  /// then rows lexicographically.
  friend std::strong_ordering operator<=>(const QMatrix& a, const QMatrix& b);

 private:
  int items_;
  int attributes_;
  std::vector<Mask> rows_;
};

/// 1 iff the profile masters every attribute item `item` (zero-based) requires.
bool capability(AttributeProfile profile, const QMatrix& q, int item);

/// Every unit row e_j, j = 1..k, appears among the rows.
bool is_complete(const QMatrix& q);

/// Same multiset of column vectors. Throws ValidationError on shape mismatch.
bool equivalent(const QMatrix& a, const QMatrix& b);

/// Column permutation whose column values are in nonincreasing order.
QMatrix canonicalize(const QMatrix& q);

/// Streams one canonical representative per equivalence class of
/// zero-row-free m x k binary matrices, in decreasing lexicographic order of
/// the column-value tuple.
class CandidateEnumerator {
 public:
  /// Throws BudgetExceeded when (2^k - 1)^m exceeds `budget`.
  CandidateEnumerator(int items, int attributes,
                      std::uint64_t budget = kDefaultCandidateBudget);

  std::optional<QMatrix> next();

  /// (2^k - 1)^m, saturating at UINT64_MAX.
  static std::uint64_t raw_count(int items, int attributes);

 private:
  int items_;
  int attributes_;
  std::uint32_t full_;
  std::vector<std::uint32_t> columns_;
  bool started_ = false;
  bool done_ = false;

  bool advance();
};

/// Convenience: materializes the whole stream.
std::vector<QMatrix> enumerate_candidates(int items, int attributes,
                                          std::uint64_t budget = kDefaultCandidateBudget);

/// m lines of k characters from {0,1}, each newline-terminated.
QMatrix parse_qmatrix(std::string_view text);
std::string format_qmatrix(const QMatrix& q);

}  // namespace qlearn
