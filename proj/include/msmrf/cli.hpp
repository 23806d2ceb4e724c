#pragma once

#include <iosfwd>

namespace msmrf {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitInputError = 2,
  kExitRuntimeError = 3,
  kExitNotConverged = 4,
};

/// Entry point of the `msmrf` tool; summaries go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace msmrf
