#pragma once

#include <iosfwd>

namespace twoscale {

/// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitNumerical = 2 };

/// Subcommands run, eoc, interp-test, bounds-check and trace-check. Each
/// prints a one-line summary to `out`; diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace twoscale
