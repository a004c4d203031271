#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stabeval {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitPrecondition = 3,
};

/// Runs `stabeval <subcommand> ...`. args excludes the program name. Results go
/// to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stabeval
