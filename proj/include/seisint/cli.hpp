#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seisint::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Runs the command line `args` (program name excluded) and returns the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seisint::cli
