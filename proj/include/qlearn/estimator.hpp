#pragma once

// Q-matrix estimation from alpha vectors: the simplex least-squares score,
// exhaustive and split searches, attribute-distribution estimates, and the
// slipping-parameter estimators used when only guessing is known.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qlearn/core.hpp"
#include "qlearn/data.hpp"
#include "qlearn/solver.hpp"
#include "qlearn/tmatrix.hpp"

namespace qlearn {

inline constexpr double kDefaultTieTolerance = 1e-7;

/// Design matrix of the score problem: the guess vector as the p_0 column,
/// followed by T_{c,g}(q). With g = 0 the p_0 column is zero and p_0 acts as
/// slack for the nonzero profiles.
Eigen::MatrixXd score_design(const QMatrix& q, const DinaParams& params, const ComboOrder& order);

/// The simplex least-squares fit behind score() and estimate_p().
LsqSolution fit_profiles(const QMatrix& q, const AlphaVector& alpha, const DinaParams& params);

/// S_{c,g}(q): distance from alpha to the set reachable by the model on the
/// probability simplex. c = 1, g = 0 gives the no-noise score S(q).
double score(const QMatrix& q, const AlphaVector& alpha, const DinaParams& params);

/// Simplex minimizer, labelled by q's column arrangement.
ProfileDistribution estimate_p(const QMatrix& q, const AlphaVector& alpha,
                               const DinaParams& params);

struct SearchOptions {
  std::uint64_t budget = kDefaultCandidateBudget;
  double tie_tol = kDefaultTieTolerance;
  int workers = 1;
  bool keep_table = false;
};

struct CandidateScore {
  QMatrix q;
  double score;
  std::optional<std::vector<double>> c;  ///< slip estimate used, unknown-c search only
  std::string note;                      ///< diagnostic, e.g. degenerate moment estimate
};

struct EstimationResult {
  QMatrix q_hat;
  double score;
  /// Every class scoring within the tie tolerance of q_hat, q_hat first.
  std::vector<QMatrix> ties;
  ProfileDistribution p_tilde;
  std::optional<std::vector<double>> c_hat;
  std::vector<CandidateScore> table;  ///< filled when SearchOptions::keep_table
  std::size_t n_candidates = 0;
};

/// Exhaustive search over canonical m x k candidates with c and g known.
/// Throws BudgetExceeded, ValidationError (c_i == g_i for some item).
EstimationResult estimate_Q(const AlphaVector& alpha, const DinaParams& params, int attributes,
                            const SearchOptions& options = {});

/// Minimum-cardinality combo S not containing `item` whose required
/// attributes include those of `item`; ties broken lexicographically.
std::optional<ItemCombo> find_cover_combo(const QMatrix& q, int item);

/// Moment estimate of c_item from the D-matrix rows of `cover` and
/// cover + {item}, clamped to [0, 1]. Alpha must use the saturated order.
/// Throws DegenerateSample when the denominator is within 1e-12 of zero.
double moment_slip(const QMatrix& q, std::span<const double> g, const AlphaVector& alpha,
                   int item, ItemCombo cover);

struct ProfileSlipOptions {
  /// Starting values applied to every free coordinate, one run each.
  std::vector<double> starts{0.9, 0.6, 0.3};
  double initial_step = 0.25;
  double min_step = 1e-6;
};

struct ProfileSlipResult {
  std::vector<double> c;
  double score = 0.0;
  int restarts = 0;
  int evaluations = 0;
};

/// Minimizes S_{c,g}(q) over the coordinates of c left unset in `fixed`,
/// each restricted to [0, 1], by compass search from several starts.
ProfileSlipResult profile_slip(const QMatrix& q, std::span<const double> g,
                               const AlphaVector& alpha,
                               const std::vector<std::optional<double>>& fixed,
                               const ProfileSlipOptions& options = {});

struct SlipEstimate {
  std::vector<double> c;
  std::vector<bool> moment;  ///< true where the moment estimator was used
  double score = 0.0;
};

/// Combined estimator: moment estimates for covered items, profiled
/// minimization for the rest. Propagates DegenerateSample.
SlipEstimate combined_slip(const QMatrix& q, std::span<const double> g, const AlphaVector& alpha,
                           const ProfileSlipOptions& options = {});

/// Exhaustive search with g known and c estimated per candidate. Candidates
/// whose moment estimate degenerates score +infinity with a diagnostic.
EstimationResult estimate_Q_unknown_c(const AlphaVector& alpha, std::span<const double> g,
                                      int attributes, const SearchOptions& options = {},
                                      const ProfileSlipOptions& slip_options = {});

/// Known c and g, or known g with c estimated.
struct GuessOnly {
  std::vector<double> g;
};
using SplitParams = std::variant<DinaParams, GuessOnly>;

struct SplitResult {
  QMatrix q;
  std::vector<EstimationResult> groups;
};

/// Estimates each item group separately on its own saturated alpha, then
/// stitches the sub-matrices by matching columns on items already placed.
/// Groups hold zero-based item indices. Throws AlignmentError when the
/// already-placed rows admit no column matching or more than one distinct
/// one, ValidationError when groups miss an item.
SplitResult split_estimate(const ResponseData& responses,
                           const std::vector<std::vector<int>>& groups, int attributes,
                           const SplitParams& params, const SearchOptions& options = {});

struct IdentifiabilityOptions {
  std::uint64_t budget = kDefaultCandidateBudget;
  double threshold = 1e-6;
  double grid_step = 0.1;
  /// Above this many grid points per candidate the c' search falls back to
  /// compass search from a fixed set of starting points.
  std::uint64_t grid_cap = 200'000;
  int refine_starts = 3;
};

struct CandidateDelta {
  QMatrix q;
  double delta;
  std::vector<double> c_prime;
  bool equivalent_to_truth;
};

struct IdentifiabilityReport {
  bool skipped = false;
  std::vector<std::string> notes;
  bool complete = false;
  bool p_star_positive = false;
  bool grid_search = true;
  std::vector<CandidateDelta> table;
  double min_delta = 0.0;  ///< over candidates not equivalent to q
  std::vector<QMatrix> flagged;
  bool identifiable() const { return !skipped && flagged.empty(); }
};

/// Population alpha* = T~_{c,g}(q) (p_0*, p*) on the saturated order, with
/// the trailing ONES row dropped.
AlphaVector population_alpha(const QMatrix& q, const DinaParams& params,
                             const ProfileDistribution& p_star);

/// For every canonical class not equivalent to q, the smallest score
/// S_{c',g}(Q') against alpha* found over c' in [0,1]^m (grid then local
/// refinement, so an upper bound on the infimum). Incomplete q is reported
/// and skipped.
IdentifiabilityReport check_identifiability(const QMatrix& q, const DinaParams& params,
                                            const ProfileDistribution& p_star,
                                            const IdentifiabilityOptions& options = {});

}  // namespace qlearn
