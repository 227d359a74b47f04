#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qlearn::cli {

/// Exit statuses shared by every subcommand.
enum Exit : int {
  kOk = 0,
  kFailure = 1,     ///< I/O, alignment and other runtime errors
  kTies = 2,        ///< estimate: non-trivial ties; verify: a property failed
  kValidation = 3,  ///< bad input or usage
  kBudget = 4,
};

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qlearn::cli
