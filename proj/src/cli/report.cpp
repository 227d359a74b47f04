#include "qlearn/report.hpp"

#include <charconv>
#include <cmath>

#include "qlearn/errors.hpp"

namespace qlearn {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

json rows_json(const QMatrix& q) { return q.row_strings(); }

std::string rows_key(const QMatrix& q) {
  std::string key;
  for (const auto& r : q.row_strings()) {
    if (!key.empty()) key += ',';
    key += r;
  }
  return key;
}

json distribution_json(const ProfileDistribution& p) {
  json out = json::object();
  for (Mask a = 0; a < p.probs.size(); ++a)
    out[profile_label(AttributeProfile{a}, p.attributes)] = p.probs[a];
  return out;
}

ProfileDistribution distribution_from_json(const json& j, int attributes) {
  ProfileDistribution p{attributes, std::vector<double>(std::size_t{1} << attributes, 0.0)};
  if (j.is_array()) {
    if (j.size() != p.probs.size())
      throw ValidationError("p* array needs 2^k = " + std::to_string(p.probs.size()) + " entries");
    for (std::size_t a = 0; a < p.probs.size(); ++a) p.probs[a] = j[a].get<double>();
  } else if (j.is_object()) {
    for (const auto& [label, v] : j.items()) {
      if (!v.is_number()) throw ValidationError("p* entry " + label + " is not a number");
      p.probs[parse_profile_label(label, attributes).bits] = v.get<double>();
    }
  } else {
    throw ValidationError("p* must be a JSON object keyed by profile labels or an array");
  }
  p.validate();
  return p;
}

namespace {

json score_json(double s) { return std::isfinite(s) ? json(s) : json(nullptr); }

}  // namespace

json estimation_json(const EstimationResult& r) {
  json ties = json::array();
  for (const auto& t : r.ties) ties.push_back(rows_json(t));
  json out{{"q_hat", rows_json(r.q_hat)},
           {"score", score_json(r.score)},
           {"ties", ties},
           {"p_tilde", distribution_json(r.p_tilde)},
           {"c_hat", r.c_hat ? json(*r.c_hat) : json(nullptr)},
           {"n_candidates", r.n_candidates}};
  if (!r.table.empty()) {
    json table = json::object();
    for (const auto& c : r.table) {
      json row{{"score", score_json(c.score)}};
      if (c.c) row["c"] = *c.c;
      if (!c.note.empty()) row["note"] = c.note;
      table[rows_key(c.q)] = row;
    }
    out["candidates"] = table;
  }
  return out;
}

json identifiability_json(const IdentifiabilityReport& r) {
  json flagged = json::array();
  for (const auto& q : r.flagged) flagged.push_back(rows_json(q));
  json table = json::object();
  for (const auto& c : r.table)
    table[rows_key(c.q)] = json{{"delta", c.delta},
                                {"c_prime", c.c_prime},
                                {"equivalent_to_truth", c.equivalent_to_truth}};
  return json{{"skipped", r.skipped},
              {"identifiable", r.identifiable()},
              {"notes", r.notes},
              {"complete", r.complete},
              {"p_star_positive", r.p_star_positive},
              {"grid_search", r.grid_search},
              {"min_delta", score_json(r.min_delta)},
              {"flagged", flagged},
              {"candidates", table}};
}

json verify_json(const VerifyReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(json{{"name", c.name},
                          {"applicable", c.applicable},
                          {"passed", c.passed},
                          {"margin", score_json(c.margin)},
                          {"note", c.note}});
  return json{{"checks", checks},
              {"all_passed", r.all_passed()},
              {"identifiability", identifiability_json(r.identifiability)}};
}

std::string tmatrix_tsv(const TMatrix& t) {
  std::string out = "COMBO";
  for (const auto& c : t.column_labels()) out += '\t' + c;
  out += '\n';
  const auto rows = t.row_labels();
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    out += rows[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < t.values.cols(); ++c) out += '\t' + format_double(t.values(r, c));
    out += '\n';
  }
  return out;
}

std::string alpha_tsv(const AlphaVector& alpha) {
  std::string out = "COMBO\tALPHA\n";
  for (std::size_t r = 0; r < alpha.order.size(); ++r)
    out += combo_label(alpha.order[r]) + '\t' +
           format_double(alpha.rates(static_cast<Eigen::Index>(r))) + '\n';
  return out;
}

}  // namespace qlearn
