#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace netabc::cli {

// Distinct process exit statuses.
enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kUsageError = 2,     // unknown subcommand or malformed command line
  kInvalidConfig = 3,  // a value fails validation
  kIoFailure = 4,      // unreadable input or unwritable output
};

inline constexpr const char* kOutputDirEnv = "NETABC_OUTPUT_DIR";

/// Parses argv (argv[0] is the program name), runs one subcommand and writes
/// its outputs plus run.meta under the output directory. Diagnostics go to
/// `err` as a single line.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace netabc::cli
