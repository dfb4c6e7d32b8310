#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cdrm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs the command line tool on args (without the program name). Normal
// output goes to out, diagnostics and usage text to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cdrm
