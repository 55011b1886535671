#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace surgekit {

// Exit statuses of run_command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;    // unknown subcommand or malformed flags
inline constexpr int kExitConfig = 3;   // scenario parse or validation failure
inline constexpr int kExitModel = 4;    // runtime model error (divergence, no equilibrium, ...)
inline constexpr int kExitIo = 5;

/// Runs one command line (without the program name). Summary lines go to
/// `out`, diagnostics to `err`; files land in --out-dir, $SURGEKIT_OUT_DIR
/// or ./out.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace surgekit
