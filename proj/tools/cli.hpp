#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rlao {

/// Exit codes of the command line tool.
inline constexpr int kExitPass = 0;
inline constexpr int kExitSuiteFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Runs the tool on `args` (without the program name).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rlao
