#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace totalloss::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;  // also: verification expectations not met
inline constexpr int kExitData = 2;
inline constexpr int kExitDegenerate = 3;

// Runs one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace totalloss::cli
