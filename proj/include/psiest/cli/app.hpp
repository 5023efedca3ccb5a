#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace psiest::cli {

enum ExitCode : int {
  kOk = 0,
  kViolated = 1,
  kUsage = 2,
  kDemoRegression = 3,
  kSolverFailure = 4,
};

/// Runs one command line (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace psiest::cli
