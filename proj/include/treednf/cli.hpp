#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace treednf::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDataError = 2,
  kCapacity = 3,
  kInternal = 4,
};

/// Runs one subcommand. `args` excludes the program name. Machine-readable
/// output goes to `out` when no --out file is given; summaries and
/// diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace treednf::cli
