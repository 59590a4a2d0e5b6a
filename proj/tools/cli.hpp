#pragma once

#include <iosfwd>

namespace torbill::cli {

enum ExitCode { kOk = 0, kConfigError = 1, kNumericError = 2, kIdentityFailure = 3 };

/// Runs the command line. `out` receives records when --out is "-", `err` diagnostics.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace torbill::cli
