#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pinembed::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitStrictFailure = 3,
};

/// Runs the tool on argv (argv[0] is the program name). What the command
/// prints goes to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace pinembed::cli
