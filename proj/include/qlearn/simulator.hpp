#pragma once

// Synthetic DINA cohorts and their reduction to alpha vectors.
//
// Random streams are fixed by algorithm so that files reproduce bit for bit
// on any conforming toolchain:
//   * profiles: one std::mt19937_64 seeded with `seed`; each draw takes
//     u = (next() >> 11) * 2^-53 and inverts the cumulative distribution over
//     profile masks 0, 1, ..., 2^k - 1;
//   * responses: subject r owns a SplitMix64 stream whose state starts at
//     seed XOR (0xD1B54A32D192ED03 * (r + 1)); item i (in item order) draws
//     u the same way and answers positively iff u < c_i (capable) or
//     u < g_i (not capable).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qlearn/core.hpp"
#include "qlearn/data.hpp"
#include "qlearn/tmatrix.hpp"

namespace qlearn {

struct SimConfig {
  QMatrix q;
  ProfileDistribution p_star;
  DinaParams params;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  /// Throws ValidationError on hard errors; returns warnings (currently only
  /// a zero-mass profile, which degenerate experiments rely on).
  std::vector<std::string> validate() const;
};

struct SimOutput {
  std::vector<AttributeProfile> profiles;
  ResponseData responses;
  std::vector<std::string> warnings;
};

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

std::vector<AttributeProfile> sample_profiles(const SimConfig& config);

ResponseData dina_responses(std::span<const AttributeProfile> profiles, const QMatrix& q,
                            const DinaParams& params, std::uint64_t seed);

SimOutput simulate(const SimConfig& config);

AlphaVector compute_alpha(const ResponseData& responses, const ComboOrder& order);

/// Header "m=<m>" then one line of m characters per subject.
std::string format_responses(const ResponseData& responses);
ResponseData parse_responses(std::string_view text);

/// One line of k characters per subject.
std::string format_profiles(std::span<const AttributeProfile> profiles, int attributes);
std::vector<AttributeProfile> parse_profiles(std::string_view text, int attributes);

}  // namespace qlearn
