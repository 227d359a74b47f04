#include "qlearn/simulator.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <unordered_map>

#include "qlearn/errors.hpp"

namespace qlearn {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::string> SimConfig::validate() const {
  if (p_star.attributes != q.attributes())
    throw ValidationError("p* is over " + std::to_string(p_star.attributes) +
                          " attributes but Q has " + std::to_string(q.attributes()));
  p_star.validate();
  params.validate(q.items());
  if (n < 1) throw ValidationError("number of subjects must be at least 1");
  std::vector<std::string> warnings;
  if (!p_star.strictly_positive())
    warnings.emplace_back(
        "p* gives zero mass to some attribute profile; the Q-matrix may not be identifiable");
  return warnings;
}

std::vector<AttributeProfile> sample_profiles(const SimConfig& config) {
  config.p_star.validate();
  std::mt19937_64 gen(config.seed);
  const auto& p = config.p_star.probs;
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) cdf[a] = (acc += p[a]);

  // Last profile with positive mass absorbs rounding in the cumulative sum.
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < p.size(); ++a)
    if (p[a] > 0.0) last_positive = a;

  std::vector<AttributeProfile> out;
  out.reserve(config.n);
  for (std::size_t r = 0; r < config.n; ++r) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    std::size_t a = 0;
    while (a < last_positive && !(u < cdf[a])) ++a;
    out.push_back(AttributeProfile{static_cast<Mask>(a)});
  }
  return out;
}

ResponseData dina_responses(std::span<const AttributeProfile> profiles, const QMatrix& q,
                            const DinaParams& params, std::uint64_t seed) {
  params.validate(q.items());
  ResponseData out{q.items(), {}};
  out.rows.reserve(profiles.size());
  for (std::size_t r = 0; r < profiles.size(); ++r) {
    SplitMix64 stream(seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(r) + 1)));
    Mask row = 0;
    for (int i = 0; i < q.items(); ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const double prob = capability(profiles[r], q, i) ? params.c[ii] : params.g[ii];
      if (stream.uniform() < prob) row |= Mask{1} << i;
    }
    out.rows.push_back(row);
  }
  return out;
}

SimOutput simulate(const SimConfig& config) {
  SimOutput out;
  out.warnings = config.validate();
  out.profiles = sample_profiles(config);
  out.responses = dina_responses(out.profiles, config.q, config.params, config.seed);
  return out;
}

AlphaVector compute_alpha(const ResponseData& responses, const ComboOrder& order) {
  if (order.items() != responses.items)
    throw ValidationError("combo order and responses disagree on the number of items");
  // Count each distinct response pattern once; every subject contributes to
  // exactly the combos its pattern contains.
  std::unordered_map<Mask, std::size_t> patterns;
  for (Mask r : responses.rows) ++patterns[r];
  std::vector<std::pair<Mask, std::size_t>> sorted(patterns.begin(), patterns.end());
  std::sort(sorted.begin(), sorted.end());

  AlphaVector alpha{order, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order.size())),
                    responses.n_subjects()};
  if (responses.rows.empty()) return alpha;
  const double n = static_cast<double>(responses.n_subjects());
  for (std::size_t s = 0; s < order.size(); ++s) {
    const Mask need = order[s].bits;
    std::size_t count = 0;
    for (const auto& [pattern, c] : sorted)
      if ((pattern & need) == need) count += c;
    alpha.rates(static_cast<Eigen::Index>(s)) = static_cast<double>(count) / n;
  }
  return alpha;
}

namespace {

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

Mask parse_bits(const std::string& line, int width, std::size_t lineno, const char* what) {
  if (static_cast<int>(line.size()) != width)
    throw ValidationError(std::string(what) + " line " + std::to_string(lineno) + " has " +
                          std::to_string(line.size()) + " characters, expected " +
                          std::to_string(width));
  Mask bits = 0;
  for (int i = 0; i < width; ++i) {
    const char ch = line[static_cast<std::size_t>(i)];
    if (ch == '1') bits |= Mask{1} << i;
    else if (ch != '0')
      throw ValidationError(std::string(what) + " line " + std::to_string(lineno) +
                            " contains a character other than 0/1");
  }
  return bits;
}

}  // namespace

std::string format_responses(const ResponseData& responses) {
  std::string out = "m=" + std::to_string(responses.items) + "\n";
  out.reserve(out.size() + responses.rows.size() * static_cast<std::size_t>(responses.items + 1));
  for (Mask r : responses.rows) {
    for (int i = 0; i < responses.items; ++i) out += ((r >> i) & 1U) ? '1' : '0';
    out += '\n';
  }
  return out;
}

ResponseData parse_responses(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front().rfind("m=", 0) != 0)
    throw ValidationError("response file must start with a 'm=<items>' header");
  int m = 0;
  try {
    m = std::stoi(lines.front().substr(2));
  } catch (const std::exception&) {
    throw ValidationError("response file header '" + lines.front() + "' is malformed");
  }
  if (m < 1 || m > kMaxItems)
    throw ValidationError("response file: item count out of range");
  ResponseData out{m, {}};
  out.rows.reserve(lines.size() - 1);
  for (std::size_t l = 1; l < lines.size(); ++l)
    out.rows.push_back(parse_bits(lines[l], m, l + 1, "response"));
  if (out.rows.empty()) throw ValidationError("response file contains no subjects");
  return out;
}

std::string format_profiles(std::span<const AttributeProfile> profiles, int attributes) {
  std::string out;
  for (auto p : profiles) {
    out += profile_label(p, attributes);
    out += '\n';
  }
  return out;
}

std::vector<AttributeProfile> parse_profiles(std::string_view text, int attributes) {
  std::vector<AttributeProfile> out;
  const auto lines = lines_of(text);
  for (std::size_t l = 0; l < lines.size(); ++l)
    out.push_back(AttributeProfile{parse_bits(lines[l], attributes, l + 1, "profile")});
  return out;
}

}  // namespace qlearn
