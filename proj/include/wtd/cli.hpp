#pragma once

// Command-line front end: simulate, iet-run, lyapunov, fit and reproduce.
//
// Exit codes: 0 success, 1 internal error, 2 configuration or domain error,
// 3 insufficient data. Every artifact <out> gets a manifest <out>.manifest.json
// with the echoed configuration, the code version and the wall time.

#include <iosfwd>
#include <string>
#include <vector>

namespace wtd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInsufficientData = 3;

/// Parses the arguments (program name first) and runs the subcommand.
/// Diagnostics go to `err`, help text to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

std::string version();

}  // namespace wtd::cli
