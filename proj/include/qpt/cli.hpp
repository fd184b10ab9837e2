#pragma once

#include <iosfwd>

namespace qpt {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitMissing = 4,
};

/// Entry point of the `qpt` tool; subcommands simulate, reconstruct, fit, report.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qpt
