#include "qlearn/core.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <sstream>

#include "qlearn/errors.hpp"

namespace qlearn {

int popcount(Mask bits) { return std::popcount(bits); }

int ItemCombo::size() const { return std::popcount(bits); }

std::vector<Mask> subsets_by_cardinality(int n) {
  if (n < 0 || n > 30) throw ValidationError("subset enumeration: n out of range");
  std::vector<Mask> out;
  out.reserve((std::size_t{1} << n) - 1);
  std::vector<int> idx;
  for (int size = 1; size <= n; ++size) {
    idx.resize(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      Mask m = 0;
      for (int i : idx) m |= Mask{1} << i;
      out.push_back(m);
      // Next combination in lexicographic order.
      int pos = size - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - size + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int i = pos + 1; i < size; ++i)
        idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
  return out;
}

std::string profile_label(AttributeProfile profile, int k) {
  std::string s(static_cast<std::size_t>(k), '0');
  for (int j = 0; j < k; ++j)
    if ((profile.bits >> j) & 1U) s[static_cast<std::size_t>(j)] = '1';
  return s;
}

std::string combo_label(ItemCombo combo) {
  std::string s;
  for (int i = 0; i < 32; ++i) {
    if (!combo.contains(i)) continue;
    if (!s.empty()) s += ',';
    s += std::to_string(i + 1);
  }
  return s;
}

AttributeProfile parse_profile_label(std::string_view label, int k) {
  if (static_cast<int>(label.size()) != k)
    throw ValidationError("profile label '" + std::string(label) + "' does not have " +
                          std::to_string(k) + " characters");
  Mask bits = 0;
  for (int j = 0; j < k; ++j) {
    const char ch = label[static_cast<std::size_t>(j)];
    if (ch == '1') bits |= Mask{1} << j;
    else if (ch != '0')
      throw ValidationError("profile label '" + std::string(label) + "' is not a bitstring");
  }
  return AttributeProfile{bits};
}

QMatrix::QMatrix(int items, int attributes, std::vector<Mask> rows)
    : items_(items), attributes_(attributes), rows_(std::move(rows)) {
  if (items_ < 1 || items_ > kMaxItems)
    throw ValidationError("Q-matrix item count must be in 1.." + std::to_string(kMaxItems));
  if (attributes_ < 1 || attributes_ > kMaxAttributes)
    throw ValidationError("Q-matrix attribute count must be in 1.." +
                          std::to_string(kMaxAttributes));
  if (static_cast<int>(rows_.size()) != items_)
    throw ValidationError("Q-matrix row count does not match item count");
  const Mask allowed = (Mask{1} << attributes_) - 1;
  for (int i = 0; i < items_; ++i) {
    const Mask r = rows_[static_cast<std::size_t>(i)];
    if (r == 0) throw ValidationError("Q-matrix row " + std::to_string(i + 1) + " is zero");
    if ((r & ~allowed) != 0)
      throw ValidationError("Q-matrix row " + std::to_string(i + 1) + " exceeds k attributes");
  }
}

QMatrix QMatrix::from_strings(std::span<const std::string> rows) {
  if (rows.empty()) throw ValidationError("Q-matrix has no rows");
  const int k = static_cast<int>(rows.front().size());
  std::vector<Mask> masks;
  masks.reserve(rows.size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != k)
      throw ValidationError("Q-matrix rows have inconsistent lengths");
    masks.push_back(parse_profile_label(r, k).bits);
  }
  return QMatrix(static_cast<int>(rows.size()), k, std::move(masks));
}

QMatrix QMatrix::from_strings(std::initializer_list<std::string_view> rows) {
  std::vector<std::string> copy(rows.begin(), rows.end());
  return from_strings(std::span<const std::string>(copy));
}

QMatrix QMatrix::identity(int k) {
  std::vector<Mask> rows;
  for (int j = 0; j < k; ++j) rows.push_back(Mask{1} << j);
  return QMatrix(k, k, std::move(rows));
}

QMatrix QMatrix::from_column_values(int items, int attributes,
                                    std::span<const std::uint32_t> columns) {
  if (static_cast<int>(columns.size()) != attributes)
    throw ValidationError("column count does not match attribute count");
  std::vector<Mask> rows(static_cast<std::size_t>(items), 0);
  for (int j = 0; j < attributes; ++j)
    for (int i = 0; i < items; ++i)
      if ((columns[static_cast<std::size_t>(j)] >> (items - 1 - i)) & 1U)
        rows[static_cast<std::size_t>(i)] |= Mask{1} << j;
  return QMatrix(items, attributes, std::move(rows));
}

std::uint32_t QMatrix::column_value(int attribute) const {
  std::uint32_t v = 0;
  for (int i = 0; i < items_; ++i) v = (v << 1) | (at(i, attribute) ? 1U : 0U);
  return v;
}

Mask QMatrix::required(ItemCombo combo) const {
  Mask u = 0;
  for (int i = 0; i < items_; ++i)
    if (combo.contains(i)) u |= rows_[static_cast<std::size_t>(i)];
  return u;
}

QMatrix QMatrix::permute_columns(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != attributes_)
    throw ValidationError("column permutation has wrong length");
  std::vector<Mask> rows(rows_.size(), 0);
  for (int j = 0; j < attributes_; ++j) {
    const int src = perm[static_cast<std::size_t>(j)];
    for (int i = 0; i < items_; ++i)
      if (at(i, src)) rows[static_cast<std::size_t>(i)] |= Mask{1} << j;
  }
  return QMatrix(items_, attributes_, std::move(rows));
}

QMatrix QMatrix::with_row(int item, Mask row) const {
  auto rows = rows_;
  rows.at(static_cast<std::size_t>(item)) = row;
  return QMatrix(items_, attributes_, std::move(rows));
}

QMatrix QMatrix::select_items(std::span<const int> items) const {
  std::vector<Mask> rows;
  rows.reserve(items.size());
  for (int i : items) {
    if (i < 0 || i >= items_) throw ValidationError("item index out of range");
    rows.push_back(rows_[static_cast<std::size_t>(i)]);
  }
  return QMatrix(static_cast<int>(items.size()), attributes_, std::move(rows));
}

std::vector<std::string> QMatrix::row_strings() const {
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (Mask r : rows_) out.push_back(profile_label(AttributeProfile{r}, attributes_));
  return out;
}

std::strong_ordering operator<=>(const QMatrix& a, const QMatrix& b) {
  if (auto c = a.items_ <=> b.items_; c != 0) return c;
  if (auto c = a.attributes_ <=> b.attributes_; c != 0) return c;
  return a.row_strings() <=> b.row_strings();
}

bool capability(AttributeProfile profile, const QMatrix& q, int item) {
  if (item < 0 || item >= q.items())
    throw std::out_of_range("capability: item " + std::to_string(item + 1) + " out of range");
  const Mask need = q.row(item);
  return (profile.bits & need) == need;
}

bool is_complete(const QMatrix& q) {
  for (int j = 0; j < q.attributes(); ++j) {
    const Mask unit = Mask{1} << j;
    if (std::ranges::find(q.rows(), unit) == q.rows().end()) return false;
  }
  return true;
}

namespace {

std::vector<std::uint32_t> sorted_columns(const QMatrix& q) {
  std::vector<std::uint32_t> cols;
  for (int j = 0; j < q.attributes(); ++j) cols.push_back(q.column_value(j));
  std::ranges::sort(cols, std::greater<>());
  return cols;
}

}  // namespace

bool equivalent(const QMatrix& a, const QMatrix& b) {
  if (a.items() != b.items() || a.attributes() != b.attributes())
    throw ValidationError("equivalent: Q-matrices have different shapes");
  return sorted_columns(a) == sorted_columns(b);
}

QMatrix canonicalize(const QMatrix& q) {
  const auto cols = sorted_columns(q);
  return QMatrix::from_column_values(q.items(), q.attributes(), cols);
}

std::uint64_t CandidateEnumerator::raw_count(int items, int attributes) {
  const std::uint64_t base = (std::uint64_t{1} << attributes) - 1;
  std::uint64_t total = 1;
  for (int i = 0; i < items; ++i) {
    if (total > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    total *= base;
  }
  return total;
}

CandidateEnumerator::CandidateEnumerator(int items, int attributes, std::uint64_t budget)
    : items_(items), attributes_(attributes) {
  if (items < 1 || items > kMaxItems || attributes < 1 || attributes > kMaxAttributes)
    throw ValidationError("candidate enumeration: dimensions out of range");
  const auto raw = raw_count(items, attributes);
  if (raw > budget)
    throw BudgetExceeded("candidate space (2^k-1)^m = " + std::to_string(raw) +
                         " exceeds budget " + std::to_string(budget));
  full_ = (items == 32) ? ~0U : ((std::uint32_t{1} << items) - 1);
  columns_.assign(static_cast<std::size_t>(attributes), full_);
}

// Steps to the next nonincreasing column tuple in decreasing lexicographic
// order; false once the tuple (0, ..., 0) has been passed.
bool CandidateEnumerator::advance() {
  int pos = attributes_ - 1;
  while (pos >= 0 && columns_[static_cast<std::size_t>(pos)] == 0) --pos;
  if (pos < 0) return false;
  const std::uint32_t v = --columns_[static_cast<std::size_t>(pos)];
  for (int j = pos + 1; j < attributes_; ++j) columns_[static_cast<std::size_t>(j)] = v;
  return true;
}

std::optional<QMatrix> CandidateEnumerator::next() {
  if (done_) return std::nullopt;
  while (true) {
    if (started_ && !advance()) {
      done_ = true;
      return std::nullopt;
    }
    started_ = true;
    std::uint32_t cover = 0;
    for (auto c : columns_) cover |= c;
    if (cover == full_) return QMatrix::from_column_values(items_, attributes_, columns_);
  }
}

std::vector<QMatrix> enumerate_candidates(int items, int attributes, std::uint64_t budget) {
  CandidateEnumerator e(items, attributes, budget);
  std::vector<QMatrix> out;
  while (auto q = e.next()) out.push_back(std::move(*q));
  return out;
}

QMatrix parse_qmatrix(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  return QMatrix::from_strings(std::span<const std::string>(rows));
}

std::string format_qmatrix(const QMatrix& q) {
  std::string out;
  for (const auto& r : q.row_strings()) {
    out += r;
    out += '\n';
  }
  return out;
}

}  // namespace qlearn
