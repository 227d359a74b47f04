#include <algorithm>
#include <cmath>
#include <limits>

#include "compass.hpp"
#include "qlearn/errors.hpp"
#include "qlearn/estimator.hpp"

namespace qlearn {

namespace {

struct Scored {
  std::vector<double> c;
  double value;  // squared score
};

// Smallest squared score of candidate q over c in [0,1]^m, g fixed.
Scored minimize_over_c(const QMatrix& q, const AlphaVector& alpha, std::span<const double> g,
                       std::span<const double> c_hint, const IdentifiabilityOptions& opt,
                       bool& used_grid) {
  const auto m = static_cast<std::size_t>(q.items());
  DinaParams params{std::vector<double>(m, 1.0), std::vector<double>(g.begin(), g.end())};
  auto objective = [&](const std::vector<double>& c) {
    params.c = c;
    const double s = score(q, alpha, params);
    return s * s;
  };

  const auto points = static_cast<std::uint64_t>(std::llround(1.0 / opt.grid_step)) + 1;
  std::uint64_t total = 1;
  bool grid = true;
  for (std::size_t i = 0; i < m; ++i) {
    if (total > opt.grid_cap / points) {
      grid = false;
      break;
    }
    total *= points;
  }
  used_grid = grid;

  std::vector<Scored> starts;
  double initial_step = 0.25;
  if (grid) {
    initial_step = opt.grid_step / 2.0;
    const auto keep = static_cast<std::size_t>(std::max(1, opt.refine_starts));
    std::vector<std::uint64_t> idx(m, 0);
    std::vector<double> c(m);
    for (std::uint64_t t = 0; t < total; ++t) {
      for (std::size_t i = 0; i < m; ++i)
        c[i] = std::min(1.0, static_cast<double>(idx[i]) * opt.grid_step);
      const double v = objective(c);
      if (starts.size() < keep || v < starts.back().value) {
        starts.push_back(Scored{c, v});
        std::ranges::stable_sort(starts, {}, &Scored::value);
        if (starts.size() > keep) starts.pop_back();
      }
      for (std::size_t i = 0; i < m; ++i) {
        if (++idx[i] < points) break;
        idx[i] = 0;
      }
    }
  } else {
    for (double v : {1.0, 0.9, 0.7, 0.5, 0.3, 0.1, 0.0})
      starts.push_back(Scored{std::vector<double>(m, v), 0.0});
    starts.push_back(Scored{std::vector<double>(c_hint.begin(), c_hint.end()), 0.0});
  }

  Scored best{{}, std::numeric_limits<double>::infinity()};
  for (const auto& s : starts) {
    auto run = detail::compass_minimize(objective, s.c, initial_step, 1e-7);
    if (run.value < best.value) best = Scored{std::move(run.x), run.value};
  }
  return best;
}

}  // namespace

IdentifiabilityReport check_identifiability(const QMatrix& q, const DinaParams& params,
                                            const ProfileDistribution& p_star,
                                            const IdentifiabilityOptions& options) {
  IdentifiabilityReport report;
  params.validate(q.items());
  p_star.validate();
  if (p_star.attributes != q.attributes())
    throw ValidationError("p* and Q-matrix disagree on the number of attributes");

  report.complete = is_complete(q);
  report.p_star_positive = p_star.strictly_positive();
  if (!report.complete) {
    report.skipped = true;
    report.notes.emplace_back(
        "Q is incomplete: some attribute has no single-attribute item, so the sufficient "
        "conditions for identifiability do not hold; candidate scan skipped");
    return report;
  }
  if (!report.p_star_positive)
    report.notes.emplace_back("p* gives zero mass to some profile; identifiability may fail");
  for (std::size_t i = 0; i < params.c.size(); ++i)
    if (params.c[i] == params.g[i]) {
      report.notes.emplace_back("c_i == g_i for some item; the augmented T-matrix loses rank");
      break;
    }

  const AlphaVector alpha = population_alpha(q, params, p_star);
  CandidateEnumerator candidates(q.items(), q.attributes(), options.budget);
  report.min_delta = std::numeric_limits<double>::infinity();
  while (auto cand = candidates.next()) {
    bool grid = true;
    const bool same = equivalent(*cand, q);
    const Scored best = minimize_over_c(*cand, alpha, params.g, params.c, options, grid);
    report.grid_search = report.grid_search && grid;
    const double delta = std::sqrt(std::max(0.0, best.value));
    report.table.push_back(CandidateDelta{*cand, delta, best.c, same});
    if (same) continue;
    report.min_delta = std::min(report.min_delta, delta);
    if (delta <= options.threshold) report.flagged.push_back(*cand);
  }
  if (!report.grid_search)
    report.notes.emplace_back("c' grid too large; searched from fixed starting points instead");
  return report;
}

}  // namespace qlearn
