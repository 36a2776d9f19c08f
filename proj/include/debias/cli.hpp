#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace debias {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Parses argv (without the program name) and executes the subcommand:
/// run, grid, emergence, rank or export. Returns 0 on success, 1 on a
/// validation error, 2 on a runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace debias
