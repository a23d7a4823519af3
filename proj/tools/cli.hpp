#pragma once

#include <string>
#include <vector>

namespace bellrand::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAbort = 2;

/// Parses and runs one command line; returns the process exit code.
int run(const std::vector<std::string>& args);

}  // namespace bellrand::cli
