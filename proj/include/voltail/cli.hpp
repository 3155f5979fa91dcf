#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace voltail {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,      ///< I/O, parse or usage error
  kExitNumerical = 2,  ///< fit, quadrature or parameter failure
};

/// Runs the tool on `args` (without the program name). Data goes to --out or
/// `out`; diagnostics and warnings go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace voltail
