#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace portpmp::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kSolverFailed = 2,
  kCompareFailed = 3,
};

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Trajectory CSV with 17 significant digits.
std::string format_number(double v);

}  // namespace portpmp::cli
