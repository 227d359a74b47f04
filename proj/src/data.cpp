#include "qlearn/data.hpp"

#include <cmath>
#include <sstream>

#include "qlearn/errors.hpp"

namespace qlearn {

ProfileDistribution ProfileDistribution::uniform(int attributes) {
  const std::size_t n = std::size_t{1} << attributes;
  return ProfileDistribution{attributes, std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

ProfileDistribution ProfileDistribution::point_mass(int attributes, AttributeProfile at) {
  std::vector<double> p(std::size_t{1} << attributes, 0.0);
  p.at(at.bits) = 1.0;
  return ProfileDistribution{attributes, std::move(p)};
}

void ProfileDistribution::validate(double tol) const {
  if (attributes < 1 || attributes > kMaxAttributes)
    throw ValidationError("profile distribution: attribute count out of range");
  if (probs.size() != (std::size_t{1} << attributes))
    throw ValidationError("profile distribution must have 2^k = " +
                          std::to_string(std::size_t{1} << attributes) + " entries");
  double sum = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (!std::isfinite(probs[a]) || probs[a] < 0.0)
      throw ValidationError("profile distribution: entry for " +
                            profile_label(AttributeProfile{static_cast<Mask>(a)}, attributes) +
                            " is negative or not finite");
    sum += probs[a];
  }
  if (std::abs(sum - 1.0) > tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "profile distribution sums to " << sum << ", not 1";
    throw ValidationError(msg.str());
  }
}

bool ProfileDistribution::strictly_positive() const {
  for (double p : probs)
    if (!(p > 0.0)) return false;
  return true;
}

Eigen::VectorXd ProfileDistribution::to_simplex_vector() const {
  const auto order = profile_order(attributes);
  Eigen::VectorXd x(static_cast<Eigen::Index>(order.size() + 1));
  x(0) = probs.at(0);
  for (std::size_t j = 0; j < order.size(); ++j)
    x(static_cast<Eigen::Index>(j + 1)) = probs.at(order[j].bits);
  return x;
}

ProfileDistribution ProfileDistribution::from_simplex_vector(int attributes,
                                                             const Eigen::VectorXd& x) {
  const auto order = profile_order(attributes);
  if (x.size() != static_cast<Eigen::Index>(order.size() + 1))
    throw ValidationError("simplex vector has wrong length for k attributes");
  ProfileDistribution d{attributes, std::vector<double>(order.size() + 1, 0.0)};
  d.probs[0] = x(0);
  for (std::size_t j = 0; j < order.size(); ++j)
    d.probs[order[j].bits] = x(static_cast<Eigen::Index>(j + 1));
  return d;
}

ProfileDistribution ProfileDistribution::permute_attributes(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != attributes)
    throw ValidationError("attribute permutation has wrong length");
  ProfileDistribution out{attributes, std::vector<double>(probs.size(), 0.0)};
  for (Mask a = 0; a < probs.size(); ++a) {
    Mask b = 0;
    for (int j = 0; j < attributes; ++j)
      if ((a >> perm[static_cast<std::size_t>(j)]) & 1U) b |= Mask{1} << j;
    out.probs[b] = probs[a];
  }
  return out;
}

ResponseData ResponseData::select_items(std::span<const int> subset) const {
  ResponseData out{static_cast<int>(subset.size()), {}};
  out.rows.reserve(rows.size());
  for (Mask r : rows) {
    Mask s = 0;
    for (std::size_t b = 0; b < subset.size(); ++b) {
      const int item = subset[b];
      if (item < 0 || item >= items) throw ValidationError("item index out of range");
      if ((r >> item) & 1U) s |= Mask{1} << b;
    }
    out.rows.push_back(s);
  }
  return out;
}

}  // namespace qlearn
