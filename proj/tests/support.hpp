#pragma once

// Shared fixtures, brute-force oracles and hand-rolled generators for tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "qlearn/core.hpp"
#include "qlearn/data.hpp"
#include "qlearn/tmatrix.hpp"

namespace qtest {

using namespace qlearn;

/// The 3x2 arithmetic example: addition, multiplication, both.
inline QMatrix eq7() { return QMatrix::from_strings({"10", "01", "11"}); }

/// Every zero-row-free m x k matrix, rows counted up in odometer order.
inline std::vector<QMatrix> all_matrices(int m, int k) {
  std::vector<QMatrix> out;
  const Mask top = (Mask{1} << k) - 1;
  std::vector<Mask> rows(static_cast<std::size_t>(m), 1);
  while (true) {
    out.emplace_back(m, k, rows);
    std::size_t i = 0;
    while (i < rows.size() && rows[i] == top) rows[i++] = 1;
    if (i == rows.size()) break;
    ++rows[i];
  }
  return out;
}

/// Sorted multiset of columns, each column as a vector of bits.
inline std::vector<std::vector<int>> column_multiset(const QMatrix& q) {
  std::vector<std::vector<int>> cols;
  for (int j = 0; j < q.attributes(); ++j) {
    std::vector<int> col;
    for (int i = 0; i < q.items(); ++i) col.push_back(static_cast<int>((q.row(i) >> j) & 1U));
    cols.push_back(col);
  }
  std::ranges::sort(cols);
  return cols;
}

inline std::size_t class_count(int m, int k) {
  std::set<std::vector<std::vector<int>>> classes;
  for (const auto& q : all_matrices(m, k)) classes.insert(column_multiset(q));
  return classes.size();
}

/// T(Q) entry straight from the definition: profile a solves every item of s.
inline double t_entry(const QMatrix& q, Mask combo, Mask profile) {
  for (int i = 0; i < q.items(); ++i)
    if (((combo >> i) & 1U) && (q.row(i) & profile) != q.row(i)) return 0.0;
  return 1.0;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::mt19937_64& rng() { return rng_; }

  QMatrix q(int m, int k) {
    std::vector<Mask> rows;
    for (int i = 0; i < m; ++i) rows.push_back(static_cast<Mask>(integer(1, (1 << k) - 1)));
    return QMatrix(m, k, rows);
  }

  /// Complete: unit rows e_1..e_k present, remaining rows random, row order shuffled.
  QMatrix complete_q(int m, int k) {
    std::vector<Mask> rows;
    for (int j = 0; j < k; ++j) rows.push_back(Mask{1} << j);
    for (int i = k; i < m; ++i) rows.push_back(static_cast<Mask>(integer(1, (1 << k) - 1)));
    std::shuffle(rows.begin(), rows.end(), rng_);
    return QMatrix(m, k, rows);
  }

  std::vector<double> vec(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

  std::vector<int> permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    std::shuffle(p.begin(), p.end(), rng_);
    return p;
  }

  /// Point on the simplex with n coordinates (exponential spacings).
  Eigen::VectorXd simplex(Eigen::Index n) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = -std::log(1.0 - uniform());
    return x / x.sum();
  }

  ProfileDistribution distribution(int k) {
    const Eigen::VectorXd x = simplex(Eigen::Index{1} << k);
    return ProfileDistribution{k, std::vector<double>(x.data(), x.data() + x.size())};
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace qtest

#include "qlearn/solver.hpp"

namespace qtest {

/// Largest KKT violation of x for min |Mx - b|^2 on the simplex: spread of
/// the gradient over the support, and how far any off-support gradient
/// entry falls below the support multiplier.
inline double kkt_violation(const qlearn::LsqProblem& p, const Eigen::VectorXd& x) {
  const Eigen::VectorXd grad = 2.0 * p.design.transpose() * (p.design * x - p.target);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  int support = 0;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x(j) > 0.0) {
      lo = std::min(lo, grad(j));
      hi = std::max(hi, grad(j));
      sum += grad(j);
      ++support;
    }
  if (support == 0) return std::numeric_limits<double>::infinity();
  const double lambda = sum / support;
  double worst = hi - lo;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x(j) <= 0.0) worst = std::max(worst, lambda - grad(j));
  return worst;
}

inline double residual_at(const qlearn::LsqProblem& p, const Eigen::VectorXd& x) {
  return (p.design * x - p.target).norm();
}

}  // namespace qtest

namespace qtest {

/// E[rate(S)] = sum_A p_A prod_{i in S} (capable ? c_i : g_i), from the model.
inline double expected_rate(const QMatrix& q, const DinaParams& p, const ProfileDistribution& ps,
                            Mask combo) {
  double total = 0.0;
  for (Mask a = 0; a < ps.probs.size(); ++a) {
    double prob = ps.probs[a];
    for (int i = 0; i < q.items(); ++i)
      if ((combo >> i) & 1U)
        prob *= (q.row(i) & a) == q.row(i) ? p.c[static_cast<std::size_t>(i)]
                                           : p.g[static_cast<std::size_t>(i)];
    total += prob;
  }
  return total;
}

/// Population alpha on the saturated order.
inline AlphaVector expected_alpha(const QMatrix& q, const DinaParams& p,
                                  const ProfileDistribution& ps) {
  const auto order = ComboOrder::saturated(q.items());
  Eigen::VectorXd rates(static_cast<Eigen::Index>(order.size()));
  for (std::size_t s = 0; s < order.size(); ++s)
    rates(static_cast<Eigen::Index>(s)) = expected_rate(q, p, ps, order[s].bits);
  return AlphaVector{order, rates, 0};
}

}  // namespace qtest
