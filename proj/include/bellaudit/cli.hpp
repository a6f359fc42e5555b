#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bellaudit::cli {

// Stable exit-code contract.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitFindings = 3,
  kExitCapExceeded = 4,
};

// args[0] is the program name. JSON reports go to `out` unless an output
// path is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bellaudit::cli
