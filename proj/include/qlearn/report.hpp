#pragma once

// Serialized forms: JSON reports and labelled TSV dumps.

#include <json.hpp>
#include <string>

#include "qlearn/estimator.hpp"
#include "qlearn/verify.hpp"

namespace qlearn {

inline constexpr const char* kReportSchemaVersion = "1.0";

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

nlohmann::json rows_json(const QMatrix& q);
std::string rows_key(const QMatrix& q);  ///< rows joined by commas, e.g. "10,01,11"
nlohmann::json distribution_json(const ProfileDistribution& p);
ProfileDistribution distribution_from_json(const nlohmann::json& j, int attributes);

/// Fields shared by full and per-group results: q_hat, score, ties,
/// p_tilde, c_hat, n_candidates.
nlohmann::json estimation_json(const EstimationResult& r);
nlohmann::json identifiability_json(const IdentifiabilityReport& r);
nlohmann::json verify_json(const VerifyReport& r);

std::string tmatrix_tsv(const TMatrix& t);
std::string alpha_tsv(const AlphaVector& alpha);

}  // namespace qlearn
