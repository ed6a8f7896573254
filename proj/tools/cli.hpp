#pragma once

#include <string>
#include <vector>

namespace lscae::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;

/// Runs the command line `args` (without the program name) and returns the
/// exit code. Usage text and errors go to stderr, results to stdout.
int run(const std::vector<std::string>& args);

}  // namespace lscae::cli
