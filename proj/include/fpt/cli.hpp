#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fpt::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kSolverError = 3;
inline constexpr int kComponentError = 4;

// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "FPT_OUTPUT_DIR";

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fpt::cli
