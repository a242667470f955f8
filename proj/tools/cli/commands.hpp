#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace limitlab::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kNumericalError = 3 };

/// Runs one command line (arguments after the program name). Reports go
/// to files under --out or to `out`; diagnostics go to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace limitlab::cli
