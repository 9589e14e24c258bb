// Batch command-line frontend. Subcommands: solve, couple, noncausal, bound,
// simulate, verify.
#pragma once

#include <ostream>

namespace bcot::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitNotConverged = 3,
  kExitUndefined = 4,
  kExitVerificationFailed = 5,
};

/// Parses argv (argv[0] is the program name) and runs one subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bcot::cli
