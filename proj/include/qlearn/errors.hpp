#pragma once

#include <stdexcept>
#include <string>

namespace qlearn {

/// Bad input: malformed files, parameter vectors of the wrong length,
/// violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A search or enumeration would exceed its configured candidate budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Moment-estimator denominator vanished for the sample at hand.
class DegenerateSample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Split estimation could not stitch sub-results into one column order.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qlearn
