#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pls::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitTransport = 4;
inline constexpr int kExitInternal = 1;

/// Runs one command line (args excludes the program name) and returns the
/// exit code. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pls::cli
