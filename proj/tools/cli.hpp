#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlreg::cli {

/// Exit codes: 0 success, 2 usage error, 3.. one per ErrorCategory (see README),
/// 10 for anything unexpected.
constexpr int kExitUsage = 2;
constexpr int kExitUnexpected = 10;

/// Runs one subcommand. The JSON report goes to `out`; usage text and the
/// machine-readable error document go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nlreg::cli
