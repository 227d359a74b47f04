#include "qlearn/tmatrix.hpp"

#include <algorithm>
#include <cmath>

#include "qlearn/errors.hpp"

namespace qlearn {

ComboOrder::ComboOrder(int items, std::vector<ItemCombo> combos)
    : items_(items), combos_(std::move(combos)) {
  if (items_ < 1 || items_ > kMaxItems)
    throw ValidationError("combo order: item count out of range");
  index_.assign(std::size_t{1} << items_, -1);
  for (std::size_t r = 0; r < combos_.size(); ++r) {
    const Mask b = combos_[r].bits;
    if (b == 0) throw ValidationError("combo order: empty item combination");
    if (b >> items_) throw ValidationError("combo order: combination refers to item beyond m");
    if (index_[b] != -1)
      throw ValidationError("combo order: duplicate combination " + combo_label(combos_[r]));
    index_[b] = static_cast<int>(r);
  }
}

ComboOrder ComboOrder::saturated(int items) {
  if (items > kMaxSaturatedItems)
    throw ValidationError("saturated T-matrix refused for m = " + std::to_string(items) +
                          " > " + std::to_string(kMaxSaturatedItems) +
                          "; use split estimation");
  std::vector<ItemCombo> combos;
  for (Mask m : subsets_by_cardinality(items)) combos.push_back(ItemCombo{m});
  return ComboOrder(items, std::move(combos));
}

ComboOrder ComboOrder::singles(int items) {
  std::vector<ItemCombo> combos;
  for (int i = 0; i < items; ++i) combos.push_back(ItemCombo{Mask{1} << i});
  return ComboOrder(items, std::move(combos));
}

ComboOrder ComboOrder::saturated_over(int items, std::span<const int> subset) {
  std::vector<ItemCombo> combos;
  for (Mask local : subsets_by_cardinality(static_cast<int>(subset.size()))) {
    Mask global = 0;
    for (std::size_t b = 0; b < subset.size(); ++b)
      if ((local >> b) & 1U) global |= Mask{1} << subset[b];
    combos.push_back(ItemCombo{global});
  }
  return ComboOrder(items, std::move(combos));
}

bool ComboOrder::is_saturated() const {
  return combos_.size() == (std::size_t{1} << items_) - 1;
}

int ComboOrder::index_of(ItemCombo combo) const {
  if (combo.bits >= index_.size()) return -1;
  return index_[combo.bits];
}

std::vector<std::string> ComboOrder::labels() const {
  std::vector<std::string> out;
  out.reserve(combos_.size());
  for (const auto& c : combos_) out.push_back(combo_label(c));
  return out;
}

std::vector<AttributeProfile> profile_order(int attributes) {
  std::vector<AttributeProfile> out;
  for (Mask m : subsets_by_cardinality(attributes)) out.push_back(AttributeProfile{m});
  return out;
}

DinaParams DinaParams::noiseless(int items) { return uniform(items, 1.0, 0.0); }

DinaParams DinaParams::uniform(int items, double c, double g) {
  return DinaParams{std::vector<double>(static_cast<std::size_t>(items), c),
                    std::vector<double>(static_cast<std::size_t>(items), g)};
}

void DinaParams::validate(int items) const {
  if (static_cast<int>(c.size()) != items || static_cast<int>(g.size()) != items)
    throw ValidationError("c and g must each have m = " + std::to_string(items) + " entries");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i]) || c[i] < 0.0 || c[i] > 1.0)
      throw ValidationError("c_" + std::to_string(i + 1) + " must lie in [0, 1]");
    if (!std::isfinite(g[i]) || g[i] < 0.0 || g[i] > 1.0)
      throw ValidationError("g_" + std::to_string(i + 1) + " must lie in [0, 1]");
  }
}

void DinaParams::validate_separated(int items) const {
  validate(items);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] == g[i])
      throw ValidationError("c_" + std::to_string(i + 1) + " equals g_" + std::to_string(i + 1) +
                            "; the estimator requires c_i != g_i for every item");
}

std::string to_string(TVariant v) {
  switch (v) {
    case TVariant::plain: return "plain";
    case TVariant::slip: return "slip";
    case TVariant::slip_guess: return "slip-guess";
    case TVariant::augmented: return "augmented";
  }
  return "?";
}

TVariant parse_variant(std::string_view name) {
  if (name == "plain") return TVariant::plain;
  if (name == "slip") return TVariant::slip;
  if (name == "slip-guess") return TVariant::slip_guess;
  if (name == "augmented") return TVariant::augmented;
  throw ValidationError("unknown T-matrix variant '" + std::string(name) + "'");
}

std::vector<std::string> TMatrix::row_labels() const {
  auto labels = rows.labels();
  if (variant == TVariant::augmented) labels.emplace_back("ONES");
  return labels;
}

std::vector<std::string> TMatrix::column_labels() const {
  std::vector<std::string> labels;
  if (variant == TVariant::augmented) labels.emplace_back("GUESS");
  for (auto p : profile_order(attributes)) labels.push_back(profile_label(p, attributes));
  return labels;
}

namespace {

void check_lengths(const QMatrix& q, const ComboOrder& order, std::size_t n, const char* what) {
  if (order.items() != q.items())
    throw ValidationError("combo order is for a different number of items");
  if (n != static_cast<std::size_t>(q.items()))
    throw ValidationError(std::string(what) + " must have m = " + std::to_string(q.items()) +
                          " entries");
}

// B_Q(I_i)[A] for every single item, as 0/1 flags per profile column.
std::vector<std::vector<bool>> single_item_rows(const QMatrix& q,
                                                const std::vector<AttributeProfile>& cols) {
  std::vector<std::vector<bool>> out(static_cast<std::size_t>(q.items()));
  for (int i = 0; i < q.items(); ++i) {
    auto& row = out[static_cast<std::size_t>(i)];
    row.reserve(cols.size());
    for (auto a : cols) row.push_back(capability(a, q, i));
  }
  return out;
}

}  // namespace

TMatrix build_T(const QMatrix& q, const ComboOrder& order) {
  if (order.items() != q.items())
    throw ValidationError("combo order is for a different number of items");
  const auto cols = profile_order(q.attributes());
  Eigen::MatrixXd t(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < order.size(); ++r) {
    const Mask need = q.required(order[r]);
    for (std::size_t a = 0; a < cols.size(); ++a)
      t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) =
          (cols[a].bits & need) == need ? 1.0 : 0.0;
  }
  return TMatrix{order, q.attributes(), TVariant::plain, std::move(t)};
}

TMatrix build_Tc(const QMatrix& q, std::span<const double> c, const ComboOrder& order) {
  check_lengths(q, order, c.size(), "c");
  TMatrix t = build_T(q, order);
  for (std::size_t r = 0; r < order.size(); ++r) {
    double factor = 1.0;
    bool first = true;
    for (int i = 0; i < q.items(); ++i) {
      if (!order[r].contains(i)) continue;
      factor = first ? c[static_cast<std::size_t>(i)] : factor * c[static_cast<std::size_t>(i)];
      first = false;
    }
    t.values.row(static_cast<Eigen::Index>(r)) *= factor;
  }
  t.variant = TVariant::slip;
  return t;
}

TMatrix build_Tc_by_products(const QMatrix& q, std::span<const double> c,
                             const ComboOrder& order) {
  check_lengths(q, order, c.size(), "c");
  const auto cols = profile_order(q.attributes());
  const auto singles = single_item_rows(q, cols);
  Eigen::MatrixXd t(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < order.size(); ++r) {
    for (std::size_t a = 0; a < cols.size(); ++a) {
      double v = 1.0;
      bool first = true;
      for (int i = 0; i < q.items(); ++i) {
        if (!order[r].contains(i)) continue;
        const double b = singles[static_cast<std::size_t>(i)][a] ? c[static_cast<std::size_t>(i)] : 0.0;
        v = first ? b : v * b;
        first = false;
      }
      t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) = v;
    }
  }
  return TMatrix{order, q.attributes(), TVariant::slip, std::move(t)};
}

TMatrix build_Tcg(const QMatrix& q, const DinaParams& params, const ComboOrder& order) {
  check_lengths(q, order, params.c.size(), "c");
  check_lengths(q, order, params.g.size(), "g");
  const auto cols = profile_order(q.attributes());
  const auto singles = single_item_rows(q, cols);
  Eigen::MatrixXd t(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < order.size(); ++r) {
    for (std::size_t a = 0; a < cols.size(); ++a) {
      double v = 1.0;
      bool first = true;
      for (int i = 0; i < q.items(); ++i) {
        if (!order[r].contains(i)) continue;
        const auto ii = static_cast<std::size_t>(i);
        // g_i + (c_i - g_i) b with b in {0, 1}, evaluated without rounding.
        const double f = singles[ii][a] ? params.c[ii] : params.g[ii];
        v = first ? f : v * f;
        first = false;
      }
      t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) = v;
    }
  }
  return TMatrix{order, q.attributes(), TVariant::slip_guess, std::move(t)};
}

Eigen::VectorXd guess_vector(std::span<const double> g, const ComboOrder& order) {
  if (g.size() != static_cast<std::size_t>(order.items()))
    throw ValidationError("g must have m = " + std::to_string(order.items()) + " entries");
  Eigen::VectorXd v(static_cast<Eigen::Index>(order.size()));
  for (std::size_t r = 0; r < order.size(); ++r) {
    double p = 1.0;
    bool first = true;
    for (int i = 0; i < order.items(); ++i) {
      if (!order[r].contains(i)) continue;
      p = first ? g[static_cast<std::size_t>(i)] : p * g[static_cast<std::size_t>(i)];
      first = false;
    }
    v(static_cast<Eigen::Index>(r)) = p;
  }
  return v;
}

TMatrix build_T_tilde(const QMatrix& q, const DinaParams& params, const ComboOrder& order) {
  const TMatrix tcg = build_Tcg(q, params, order);
  const auto n = tcg.values.rows();
  const auto p = tcg.values.cols();
  Eigen::MatrixXd t(n + 1, p + 1);
  t.block(0, 0, n, 1) = guess_vector(params.g, order);
  t.block(0, 1, n, p) = tcg.values;
  t.row(n).setOnes();
  return TMatrix{order, q.attributes(), TVariant::augmented, std::move(t)};
}

DMatrix::DMatrix(std::vector<double> g, ComboOrder order) : g_(std::move(g)), order_(std::move(order)) {
  if (!order_.is_saturated())
    throw ValidationError("D-matrix requires a saturated combo order");
  if (g_.size() != static_cast<std::size_t>(order_.items()))
    throw ValidationError("g must have m = " + std::to_string(order_.items()) + " entries");
}

std::size_t DMatrix::column_of(ItemCombo combo) const {
  if (combo.bits == 0) return order_.size();
  const int idx = order_.index_of(combo);
  if (idx < 0) throw ValidationError("D-matrix: unknown combo " + combo_label(combo));
  return static_cast<std::size_t>(idx);
}

Eigen::RowVectorXd DMatrix::row(ItemCombo combo) const {
  if (combo.bits == 0 || order_.index_of(combo) < 0)
    throw ValidationError("D-matrix: no row labelled '" + combo_label(combo) + "'");
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(cols()));
  for_each_nonzero(combo, [&](std::size_t col, double coef) {
    r(static_cast<Eigen::Index>(col)) = coef;
  });
  return r;
}

Eigen::MatrixXd DMatrix::dense() const {
  if (items() > 12) throw ValidationError("dense D-matrix refused for m > 12");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()),
                                            static_cast<Eigen::Index>(cols()));
  for (std::size_t r = 0; r < rows(); ++r)
    for_each_nonzero(order_[r], [&](std::size_t col, double coef) {
      d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = coef;
    });
  return d;
}

Eigen::MatrixXd DMatrix::apply(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != static_cast<Eigen::Index>(cols()))
    throw ValidationError("D-matrix apply: row count mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()), rhs.cols());
  for (std::size_t r = 0; r < rows(); ++r)
    for_each_nonzero(order_[r], [&](std::size_t col, double coef) {
      out.row(static_cast<Eigen::Index>(r)) += coef * rhs.row(static_cast<Eigen::Index>(col));
    });
  return out;
}

DMatrix build_D(std::span<const double> g, const ComboOrder& order) {
  return DMatrix(std::vector<double>(g.begin(), g.end()), order);
}

std::pair<Eigen::RowVectorXd, Eigen::RowVectorXd> moment_rows(const DMatrix& d, ItemCombo cover,
                                                               int item) {
  if (item < 0 || item >= d.items()) throw ValidationError("moment_rows: item out of range");
  if (cover.contains(item))
    throw ValidationError("moment_rows: cover combo must not contain the item itself");
  const ItemCombo joint{cover.bits | (Mask{1} << item)};
  return {d.row(cover), d.row(joint)};
}

double min_singular_value(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (m.rows() < m.cols()) return 0.0;  // rank at most rows < cols
  return s(s.size() - 1);
}

}  // namespace qlearn
