#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semidiag::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kFit = 3 };

/// Runs the `semidiag` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semidiag::cli
