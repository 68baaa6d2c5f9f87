#pragma once

#include <ostream>
#include <span>
#include <string>

namespace remirl {

/// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNotConverged = 2;

/// Entry point for the `remirl` tool; args exclude the program name.
/// Errors are written to `err` as a JSON object with `error` and `message`.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

} // namespace remirl
