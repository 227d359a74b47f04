// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

#include "qlearn/cli.hpp"
#include "qlearn/errors.hpp"
#include "qlearn/estimator.hpp"
#include "qlearn/simulator.hpp"
#include "qlearn/verify.hpp"
#include "support.hpp"

using namespace qlearn;
using qtest::eq7;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

AlphaVector simulate_alpha(const QMatrix& q, const DinaParams& p, std::size_t n, std::uint64_t seed) {
  const auto out = simulate(SimConfig{q, ProfileDistribution::uniform(q.attributes()), p, n, seed});
  return compute_alpha(out.responses, ComboOrder::saturated(q.items()));
}

Outcome golden() {
  const ComboOrder four(3, {ItemCombo{0b001}, ItemCombo{0b010}, ItemCombo{0b100}, ItemCombo{0b011}});
  bool ok = build_T(eq7(), ComboOrder::singles(3)).values == mat({{1, 0, 1}, {0, 1, 1}, {0, 0, 1}});
  ok = ok && build_T(eq7(), four).values == mat({{1, 0, 1}, {0, 1, 1}, {0, 0, 1}, {0, 0, 1}});
  qtest::Gen gen(101);
  for (int t = 0; t < 5; ++t) {
    const auto c = gen.vec(3, 0, 1), g = gen.vec(3, 0, 1);
    const double c1 = c[0], c2 = c[1], c3 = c[2], g1 = g[0], g2 = g[1], g3 = g[2];
    ok = ok && build_Tc(eq7(), c, four).values == mat({{c1, 0, c1}, {0, c2, c2}, {0, 0, c3}, {0, 0, c1 * c2}});
    ok = ok && build_Tcg(eq7(), DinaParams{c, g}, four).values ==
                   mat({{c1, g1, c1}, {g2, c2, c2}, {g3, g3, c3}, {c1 * g2, g1 * c2, c1 * c2}});
  }
  return {ok, "T, 4-row T, T_c and T_{c,g} at 5 substitutions, exact"};
}

Outcome d_identity() {
  qtest::Gen gen(102);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int m = gen.integer(2, 4), k = gen.integer(2, 3);
    const DinaParams p{gen.vec(static_cast<std::size_t>(m), 0, 1), gen.vec(static_cast<std::size_t>(m), 0, 1)};
    worst = std::max(worst, d_identity_error(gen.q(m, k), p));
  }
  return {worst <= 1e-12, fmt("max error %.3g over 100 instances (limit 1e-12)", worst)};
}

Outcome rank_properties() {
  qtest::Gen gen(103);
  double lead_min = 1e300, aug_min = 1e300;
  bool structure = true;
  for (int t = 0; t < 50; ++t) {
    const int k = gen.integer(2, 3), m = gen.integer(k, 5);
    const QMatrix q = gen.complete_q(m, k);
    const Eigen::MatrixXd block = leading_block(q);
    structure = structure && block_triangular_defect(block, k) == 0.0;
    lead_min = std::min(lead_min, min_singular_value(block));
    std::vector<double> c(static_cast<std::size_t>(m)), g(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      do {
        c[i] = gen.uniform();
        g[i] = gen.uniform();
      } while (std::abs(c[i] - g[i]) < 0.05);
    }
    aug_min = std::min(aug_min, min_singular_value(
                                    build_T_tilde(q, DinaParams{c, g}, ComboOrder::saturated(m)).values));
  }
  return {structure && lead_min > 1e-10 && aug_min > 1e-10,
          fmt("leading block triangular=%s, min sv %.3g; augmented min sv %.3g", structure ? "yes" : "no",
              lead_min, aug_min)};
}

Outcome noiseless() {
  const auto p = DinaParams::noiseless(3);
  int recovered = 0;
  double worst = 0.0;
  for (int s = 0; s < 200; ++s) {
    const AlphaVector alpha = simulate_alpha(eq7(), p, 2000, 4000 + static_cast<std::uint64_t>(s));
    worst = std::max(worst, score(eq7(), alpha, p));
    recovered += equivalent(estimate_Q(alpha, p, 2).q_hat, eq7());
  }
  return {worst <= 1e-10 && recovered >= 198,
          fmt("max true-Q score %.3g; recovered %d/200 (need >= 198)", worst, recovered)};
}

Outcome brute_identifiability() {
  const auto p = DinaParams::noiseless(3);
  const auto rep = check_identifiability(eq7(), p, ProfileDistribution::uniform(2));
  std::map<std::vector<Mask>, double> delta;
  for (const auto& c : rep.table) delta[std::vector<Mask>(c.q.rows().begin(), c.q.rows().end())] = c.delta;
  // Every zero-row-free matrix, not only class representatives, plus an
  // independent 0.1 grid that must never beat the refined value.
  const AlphaVector alpha = qtest::expected_alpha(eq7(), p, ProfileDistribution::uniform(2));
  int checked = 0;
  double min_delta = 1e300;
  bool consistent = true;
  for (const auto& q : qtest::all_matrices(3, 2)) {
    if (equivalent(q, eq7())) continue;
    const QMatrix c = canonicalize(q);
    const double d = delta.at(std::vector<Mask>(c.rows().begin(), c.rows().end()));
    min_delta = std::min(min_delta, d);
    double grid = 1e300;
    for (int a = 0; a <= 10; ++a)
      for (int b = 0; b <= 10; ++b)
        for (int e = 0; e <= 10; ++e)
          grid = std::min(grid, score(q, alpha, DinaParams{{a / 10.0, b / 10.0, e / 10.0}, {0, 0, 0}}));
    consistent = consistent && d <= grid + 1e-9;
    ++checked;
  }
  return {checked == 25 && min_delta > 1e-6 && consistent,
          fmt("%d non-equivalent matrices, min delta %.4g (limit > 1e-6), grid-consistent=%s", checked, min_delta,
              consistent ? "yes" : "no")};
}

Outcome dina_recovery() {
  const auto p = DinaParams::uniform(3, 0.8, 0.2);
  std::vector<int> rec;
  for (std::size_t n : {1000UL, 10000UL, 100000UL}) {
    int r = 0;
    for (int s = 0; s < 50; ++s)
      r += equivalent(estimate_Q(simulate_alpha(eq7(), p, n, 6000 + static_cast<std::uint64_t>(s)), p, 2).q_hat, eq7());
    rec.push_back(r);
  }
  const bool ok = rec[0] <= rec[1] && rec[1] <= rec[2] && rec[2] >= 48;
  return {ok, fmt("recovered %d/%d/%d of 50 at N=1e3/1e4/1e5 (need nondecreasing, >= 48 at 1e5)", rec[0], rec[1],
                  rec[2])};
}

Outcome moment() {
  const auto p = DinaParams::uniform(3, 0.8, 0.2);
  int close = 0;
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    const double c1 = moment_slip(eq7(), p.g, simulate_alpha(eq7(), p, 100000, 7000 + static_cast<std::uint64_t>(s)),
                                  0, ItemCombo{0b100});
    worst = std::max(worst, std::abs(c1 - 0.8));
    close += std::abs(c1 - 0.8) <= 0.02;
  }
  return {close >= 48, fmt("|c1 - 0.8| <= 0.02 in %d/50 (need >= 48); max error %.4f", close, worst)};
}

Outcome unknown_c() {
  const QMatrix q = QMatrix::from_strings({"10", "01", "11", "11"});
  const auto p = DinaParams::uniform(4, 0.8, 0.2);
  int recovered = 0, c_close = 0;
  for (int s = 0; s < 25; ++s) {
    const auto r = estimate_Q_unknown_c(simulate_alpha(q, p, 100000, 8000 + static_cast<std::uint64_t>(s)), p.g, 2);
    recovered += equivalent(r.q_hat, q);
    bool close = r.c_hat.has_value();
    if (close)
      for (double c : *r.c_hat) close = close && std::abs(c - 0.8) <= 0.05;
    c_close += close;
  }
  return {recovered >= 23 && c_close >= 20,
          fmt("recovered %d/25 (need >= 23); c_hat within 0.05 in %d/25 (need >= 20)", recovered, c_close)};
}

Outcome split() {
  const QMatrix q = QMatrix::from_strings({"10", "01", "11", "10", "01", "11"});
  const auto p = DinaParams::noiseless(6);
  int recovered = 0, identical = 0, both = 0;
  for (int s = 0; s < 100; ++s) {
    const auto out = simulate(SimConfig{q, ProfileDistribution::uniform(2), p, 5000, 9000 + static_cast<std::uint64_t>(s)});
    std::optional<QMatrix> stitched, full;
    try {
      stitched = split_estimate(out.responses, {{0, 1, 2, 3}, {2, 3, 4, 5}}, 2, p).q;
    } catch (const AlignmentError&) {
    }
    try {
      full = estimate_Q(compute_alpha(out.responses, ComboOrder::saturated(6)), p, 2).q_hat;
    } catch (const std::exception&) {
    }
    recovered += stitched && equivalent(*stitched, q);
    if (stitched && full) {
      ++both;
      identical += *stitched == *full;
    }
  }
  return {recovered >= 99 && identical == both,
          fmt("recovered %d/100 (need >= 99); identical to exhaustive on %d/%d", recovered, identical, both)};
}

Outcome solver() {
  qtest::Gen gen(110);
  double worst_kkt = 0.0;
  int dominated = 0;
  for (int t = 0; t < 500; ++t) {
    const int n = gen.integer(1, 8), rows = gen.integer(1, 12);
    LsqProblem p{Eigen::MatrixXd(rows, n), Eigen::VectorXd(rows)};
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < n; ++c) p.design(r, c) = gen.uniform(-1, 1);
      p.target(r) = gen.uniform(-1, 1);
    }
    const auto s = simplex_lsq(p);
    worst_kkt = std::max(worst_kkt, qtest::kkt_violation(p, s.x));
    bool best = true;
    for (int i = 0; i < 1000; ++i) best = best && s.residual <= qtest::residual_at(p, gen.simplex(n));
    dominated += best;
  }
  return {worst_kkt <= 1e-8 && dominated == 500,
          fmt("max KKT violation %.3g (limit 1e-8); beats 1000 random points on %d/500", worst_kkt, dominated)};
}

Outcome degenerate() {
  const auto dir = std::filesystem::temp_directory_path() / ("qlearn_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "q.txt") << "10\n01\n11\n";
  std::ostringstream out, err;
  const int code = cli::run({"qlearn", "verify", "--q", (dir / "q.txt").string(), "--pstar", "point:11"}, out, err);
  std::filesystem::remove_all(dir);
  const auto j = nlohmann::json::parse(out.str());
  int flagged = 0;
  for (const auto& [key, c] : j["identifiability"]["candidates"].items())
    flagged += !c["equivalent_to_truth"].get<bool>() && c["delta"].get<double>() <= 1e-6;
  return {code == cli::kTies && flagged >= 1 && !j["identifiability"]["identifiable"].get<bool>(),
          fmt("verify exit %d, %d candidates with delta <= 1e-6", code, flagged)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"golden matrices", 1, golden},
      {"D-identity", 10, d_identity},
      {"rank properties", 10, rank_properties},
      {"noiseless exactness", 120, noiseless},
      {"brute-force identifiability", 60, brute_identifiability},
      {"DINA recovery", 600, dina_recovery},
      {"moment estimator", 120, moment},
      {"unknown-c pipeline", 900, unknown_c},
      {"split-and-merge", 300, split},
      {"solver certificate", 30, solver},
      {"degenerate population", 60, degenerate},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < criteria[i].limit_s;
    failed += !pass;
    std::printf("%s %2zu %-28s %s [%.2fs, limit %.0fs]\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs, criteria[i].limit_s);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
