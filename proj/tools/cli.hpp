#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dtwin::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;  ///< validation or parse failure in an input
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dtwin::cli
