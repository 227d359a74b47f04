#include <algorithm>
#include <numeric>
#include <set>

#include "qlearn/errors.hpp"
#include "qlearn/estimator.hpp"
#include "qlearn/simulator.hpp"

namespace qlearn {

namespace {

template <typename T>
std::vector<T> subset_of(const std::vector<T>& v, const std::vector<int>& items) {
  std::vector<T> out;
  out.reserve(items.size());
  for (int i : items) out.push_back(v.at(static_cast<std::size_t>(i)));
  return out;
}

std::string group_label(const std::vector<int>& group) {
  std::string s = "{";
  for (std::size_t b = 0; b < group.size(); ++b) {
    if (b) s += ',';
    s += std::to_string(group[b] + 1);
  }
  return s + "}";
}

}  // namespace

SplitResult split_estimate(const ResponseData& responses,
                           const std::vector<std::vector<int>>& groups, int attributes,
                           const SplitParams& params, const SearchOptions& options) {
  const int m = responses.items;
  if (groups.empty()) throw ValidationError("split estimation needs at least one item group");
  std::vector<bool> covered(static_cast<std::size_t>(m), false);
  for (const auto& group : groups) {
    if (group.empty()) throw ValidationError("split estimation: empty item group");
    if (std::set<int>(group.begin(), group.end()).size() != group.size())
      throw ValidationError("split estimation: group " + group_label(group) +
                            " repeats an item");
    for (int i : group) {
      if (i < 0 || i >= m) throw ValidationError("split estimation: item index out of range");
      covered[static_cast<std::size_t>(i)] = true;
    }
  }
  for (int i = 0; i < m; ++i)
    if (!covered[static_cast<std::size_t>(i)])
      throw ValidationError("split estimation: item " + std::to_string(i + 1) +
                            " belongs to no group");

  std::vector<std::optional<Mask>> placed(static_cast<std::size_t>(m));
  std::vector<EstimationResult> results;
  for (const auto& group : groups) {
    const ResponseData sub = responses.select_items(group);
    const AlphaVector alpha = compute_alpha(sub, ComboOrder::saturated(sub.items));
    EstimationResult est = std::visit(
        [&](const auto& p) -> EstimationResult {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, DinaParams>) {
            return estimate_Q(alpha, DinaParams{subset_of(p.c, group), subset_of(p.g, group)},
                              attributes, options);
          } else {
            const auto g = subset_of(p.g, group);
            return estimate_Q_unknown_c(alpha, g, attributes, options);
          }
        },
        params);

    if (results.empty()) {
      // The first group fixes the column order.
      for (std::size_t b = 0; b < group.size(); ++b)
        placed[static_cast<std::size_t>(group[b])] = est.q_hat.row(static_cast<int>(b));
      results.push_back(std::move(est));
      continue;
    }

    // Column matchings of the sub-result that agree with rows already placed;
    // distinct outcomes on the newly placed rows must be unique.
    std::vector<int> perm(static_cast<std::size_t>(attributes));
    std::iota(perm.begin(), perm.end(), 0);
    std::set<std::vector<Mask>> outcomes;
    do {
      const QMatrix arranged = est.q_hat.permute_columns(perm);
      bool agrees = true;
      std::vector<Mask> rows;
      for (std::size_t b = 0; b < group.size(); ++b) {
        const auto& have = placed[static_cast<std::size_t>(group[b])];
        const Mask r = arranged.row(static_cast<int>(b));
        if (have && *have != r) {
          agrees = false;
          break;
        }
        rows.push_back(r);
      }
      if (agrees) outcomes.insert(std::move(rows));
    } while (std::next_permutation(perm.begin(), perm.end()));

    if (outcomes.empty())
      throw AlignmentError("split estimation: group " + group_label(group) +
                           " disagrees with earlier groups on every shared item row");
    if (outcomes.size() > 1)
      throw AlignmentError("split estimation: rows shared by group " + group_label(group) +
                           " do not pin a unique column matching (" +
                           std::to_string(outcomes.size()) + " candidates)");
    const auto& rows = *outcomes.begin();
    for (std::size_t b = 0; b < group.size(); ++b) placed[static_cast<std::size_t>(group[b])] = rows[b];
    results.push_back(std::move(est));
  }

  std::vector<Mask> rows;
  rows.reserve(placed.size());
  for (const auto& r : placed) rows.push_back(*r);
  return SplitResult{canonicalize(QMatrix(m, attributes, std::move(rows))), std::move(results)};
}

}  // namespace qlearn
