#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lehmann::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

// Runs the command line `args` (args[0] is the program name). Machine output
// goes to `out` unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace lehmann::cli
