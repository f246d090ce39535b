#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rabi::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidParameters = 2,
  kConvergenceFailure = 3,
  kIoError = 4,
};

/// Runs one command line (without the program name). Output goes to `out` unless --out
/// names a file; diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rabi::cli
