#pragma once

#include <ostream>

namespace walkrg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitCheck = 4;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "WALKRG_OUTPUT_DIR";

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace walkrg::cli
