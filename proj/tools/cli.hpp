#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mxl::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kCheckFailed = 3,  // non-convergence, failed gradient or replay check
};

/// Runs one command line (without the program name).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mxl::cli
