#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace oodlab::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kConditionFailed = 3, kRuntime = 4 };

/// Parses argv, runs one subcommand and returns the process exit code.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oodlab::cli
