#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace colorfm {

/// Exit codes: 0 success, 1 domain error (violations, rejected decision,
/// cap exceeded), 2 usage, syntax or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace colorfm
