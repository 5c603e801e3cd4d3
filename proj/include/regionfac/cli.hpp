#pragma once

#include <ostream>

#include "regionfac/error.hpp"

namespace regionfac::cli {

/// Process exit codes; shell pipelines branch on the failure class.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDimension = 3,
  kZeroBackground = 4,
  kVerificationFailed = 5,
};

int exit_code_for(ErrorCode code) noexcept;

/// Runs the command line in-process. Machine-readable results go to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace regionfac::cli
