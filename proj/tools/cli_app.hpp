#pragma once

#include <iosfwd>

namespace dirac::cli {

enum ExitCode : int { kSuccess = 0, kComputeError = 1, kUsageError = 2 };

/// Entry point of the `dirac` tool; regular output goes to `out`, usage text,
/// diagnostics and (for stdout runs) the error manifest to `err`.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace dirac::cli
