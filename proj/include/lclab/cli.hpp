#pragma once

#include <iosfwd>

namespace lclab {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitInput = 3;

/// Parses argv (argv[0] is the program name), runs the subcommand and
/// writes results to `out` (or --out) and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lclab
