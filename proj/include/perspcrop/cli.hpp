#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace perspcrop::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitFailure = 2;

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on a validation error, 2 on a runtime failure; diagnostics go
/// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace perspcrop::cli
