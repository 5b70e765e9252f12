#pragma once

#include <iosfwd>

namespace charsum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Results go to `out` unless --output names a file; diagnostics go to `err`.
/// Returns 0 on success, 1 when a verification fails, 2 on usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace charsum::cli
