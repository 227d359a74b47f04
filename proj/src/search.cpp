#include <algorithm>
#include <limits>

#include "parallel.hpp"
#include "qlearn/errors.hpp"
#include "qlearn/estimator.hpp"

namespace qlearn {

namespace {

constexpr std::size_t kBatch = 1024;

struct SearchOutcome {
  std::vector<CandidateScore> near;  // within tolerance of the best, sorted
  std::vector<CandidateScore> table;
  std::size_t count = 0;
};

// Scores every canonical candidate and keeps those within tie_tol of the
// minimum. Batches are scored in parallel and reduced in enumeration order,
// so the outcome does not depend on the worker count.
template <typename Scorer>
SearchOutcome run_search(int items, int attributes, const SearchOptions& options,
                         Scorer&& scorer) {
  CandidateEnumerator candidates(items, attributes, options.budget);
  SearchOutcome out;
  double best = std::numeric_limits<double>::infinity();
  std::vector<QMatrix> batch;
  std::vector<std::optional<CandidateScore>> scored;

  auto reduce = [&]() {
    scored.assign(batch.size(), std::nullopt);
    detail::parallel_for(batch.size(), options.workers,
                         [&](std::size_t i) { scored[i] = scorer(batch[i]); });
    for (auto& s : scored) {
      ++out.count;
      if (options.keep_table) out.table.push_back(*s);
      if (s->score < best) {
        best = s->score;
        std::erase_if(out.near, [&](const CandidateScore& c) {
          return !(c.score <= best + options.tie_tol);
        });
      }
      if (s->score <= best + options.tie_tol || out.near.empty())
        out.near.push_back(std::move(*s));
    }
    batch.clear();
  };

  while (auto q = candidates.next()) {
    batch.push_back(std::move(*q));
    if (batch.size() == kBatch) reduce();
  }
  if (!batch.empty()) reduce();

  std::ranges::sort(out.near, [](const CandidateScore& a, const CandidateScore& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.q < b.q;
  });
  return out;
}

std::vector<QMatrix> tie_list(const std::vector<CandidateScore>& near) {
  std::vector<QMatrix> ties;
  ties.reserve(near.size());
  for (const auto& c : near) ties.push_back(c.q);
  return ties;
}

void require_saturated(const AlphaVector& alpha) {
  if (!alpha.order.is_saturated())
    throw ValidationError("Q-matrix search needs alpha on the saturated combo order");
}

}  // namespace

EstimationResult estimate_Q(const AlphaVector& alpha, const DinaParams& params, int attributes,
                            const SearchOptions& options) {
  require_saturated(alpha);
  const int m = alpha.order.items();
  params.validate_separated(m);
  auto outcome = run_search(m, attributes, options, [&](const QMatrix& q) {
    return CandidateScore{q, score(q, alpha, params), std::nullopt, {}};
  });
  const auto& winner = outcome.near.front();
  return EstimationResult{winner.q,
                          winner.score,
                          tie_list(outcome.near),
                          estimate_p(winner.q, alpha, params),
                          std::nullopt,
                          std::move(outcome.table),
                          outcome.count};
}

EstimationResult estimate_Q_unknown_c(const AlphaVector& alpha, std::span<const double> g,
                                      int attributes, const SearchOptions& options,
                                      const ProfileSlipOptions& slip_options) {
  require_saturated(alpha);
  const int m = alpha.order.items();
  if (g.size() != static_cast<std::size_t>(m))
    throw ValidationError("g must have m = " + std::to_string(m) + " entries");
  for (double v : g)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("g entries must lie in [0, 1]");

  auto outcome = run_search(m, attributes, options, [&](const QMatrix& q) {
    try {
      auto est = combined_slip(q, g, alpha, slip_options);
      return CandidateScore{q, est.score, std::move(est.c), {}};
    } catch (const DegenerateSample& e) {
      return CandidateScore{q, std::numeric_limits<double>::infinity(), std::nullopt, e.what()};
    }
  });
  const auto& winner = outcome.near.front();
  if (!winner.c)
    throw DegenerateSample("every candidate produced a degenerate slip estimate");
  const DinaParams winner_params{*winner.c, std::vector<double>(g.begin(), g.end())};
  return EstimationResult{winner.q,
                          winner.score,
                          tie_list(outcome.near),
                          estimate_p(winner.q, alpha, winner_params),
                          winner.c,
                          std::move(outcome.table),
                          outcome.count};
}

}  // namespace qlearn
