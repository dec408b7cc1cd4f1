#pragma once

#include <string>
#include <vector>

namespace fanning::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

/// Runs the command line `args` (args[0] is the program name). Returns the process exit code:
/// 0 on success, 1 for usage or input errors, 2 for numerical failures.
int run(const std::vector<std::string>& args);

}  // namespace fanning::cli
