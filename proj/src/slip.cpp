#include <algorithm>
#include <cmath>

#include "compass.hpp"
#include "qlearn/errors.hpp"
#include "qlearn/estimator.hpp"

namespace qlearn {

std::optional<ItemCombo> find_cover_combo(const QMatrix& q, int item) {
  if (item < 0 || item >= q.items()) throw ValidationError("find_cover_combo: item out of range");
  std::vector<int> others;
  for (int i = 0; i < q.items(); ++i)
    if (i != item) others.push_back(i);
  const Mask need = q.row(item);
  // Local subsets enumerate in the same order as their images, since the
  // local-to-global index map is increasing.
  for (Mask local : subsets_by_cardinality(static_cast<int>(others.size()))) {
    Mask global = 0;
    for (std::size_t b = 0; b < others.size(); ++b)
      if ((local >> b) & 1U) global |= Mask{1} << others[b];
    if ((q.required(ItemCombo{global}) & need) == need) return ItemCombo{global};
  }
  return std::nullopt;
}

double moment_slip(const QMatrix& q, std::span<const double> g, const AlphaVector& alpha,
                   int item, ItemCombo cover) {
  if (alpha.order.items() != q.items() || !alpha.order.is_saturated())
    throw ValidationError("moment estimator needs alpha on the saturated order of m items");
  if (item < 0 || item >= q.items()) throw ValidationError("moment_slip: item out of range");
  if (cover.bits == 0 || cover.contains(item) || (cover.bits >> q.items()) != 0)
    throw ValidationError("moment_slip: invalid cover combo");
  if ((q.required(cover) & q.row(item)) != q.row(item))
    throw ValidationError("moment_slip: combo " + combo_label(cover) +
                          " does not cover the attributes of item " + std::to_string(item + 1));

  const DMatrix d = build_D(g, alpha.order);
  const auto [a_g, a_star] = moment_rows(d, cover, item);
  Eigen::VectorXd extended(alpha.rates.size() + 1);
  extended.head(alpha.rates.size()) = alpha.rates;
  extended(alpha.rates.size()) = 1.0;
  const double den = a_g.dot(extended);
  const double num = a_star.dot(extended);
  if (std::abs(den) <= 1e-12)
    throw DegenerateSample("moment estimate for item " + std::to_string(item + 1) +
                           " has a vanishing denominator (cover " + combo_label(cover) + ")");
  return std::clamp(g[static_cast<std::size_t>(item)] + num / den, 0.0, 1.0);
}

ProfileSlipResult profile_slip(const QMatrix& q, std::span<const double> g,
                               const AlphaVector& alpha,
                               const std::vector<std::optional<double>>& fixed,
                               const ProfileSlipOptions& options) {
  const auto m = static_cast<std::size_t>(q.items());
  if (fixed.size() != m || g.size() != m)
    throw ValidationError("profile_slip: c and g assignments must have m entries");

  ProfileSlipResult result;
  result.c.assign(m, 0.0);
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < m; ++i) {
    if (fixed[i]) result.c[i] = std::clamp(*fixed[i], 0.0, 1.0);
    else free.push_back(i);
  }
  DinaParams params{result.c, std::vector<double>(g.begin(), g.end())};
  if (free.empty()) {
    result.score = score(q, alpha, params);
    return result;
  }

  auto objective = [&](const std::vector<double>& x) {
    for (std::size_t f = 0; f < free.size(); ++f) params.c[free[f]] = x[f];
    const double s = score(q, alpha, params);
    return s * s;
  };

  detail::CompassResult best;
  bool have_best = false;
  for (double start : options.starts) {
    auto run = detail::compass_minimize(objective, std::vector<double>(free.size(), start),
                                        options.initial_step, options.min_step);
    result.evaluations += run.evaluations;
    ++result.restarts;
    if (!have_best || run.value < best.value) {
      best = std::move(run);
      have_best = true;
    }
  }
  for (std::size_t f = 0; f < free.size(); ++f) result.c[free[f]] = std::clamp(best.x[f], 0.0, 1.0);
  params.c = result.c;
  result.score = score(q, alpha, params);
  return result;
}

SlipEstimate combined_slip(const QMatrix& q, std::span<const double> g, const AlphaVector& alpha,
                           const ProfileSlipOptions& options) {
  const auto m = static_cast<std::size_t>(q.items());
  std::vector<std::optional<double>> fixed(m);
  SlipEstimate out;
  out.moment.assign(m, false);
  for (int i = 0; i < q.items(); ++i) {
    if (auto cover = find_cover_combo(q, i)) {
      fixed[static_cast<std::size_t>(i)] = moment_slip(q, g, alpha, i, *cover);
      out.moment[static_cast<std::size_t>(i)] = true;
    }
  }
  auto prof = profile_slip(q, g, alpha, fixed, options);
  out.c = std::move(prof.c);
  out.score = prof.score;
  return out;
}

}  // namespace qlearn
