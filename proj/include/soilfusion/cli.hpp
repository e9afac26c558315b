#pragma once

// Command-line driver: generate, correlate, simulate, eval, pipeline, replay.

#include <iosfwd>
#include <string>
#include <vector>

namespace soilfusion::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSeedEnv = "SOILFUSION_SEED";

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run(int argc, char** argv);

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace soilfusion::cli
