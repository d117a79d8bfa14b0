#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qsr::cli {

/// Exit codes: 0 success, 1 data or runtime error, 2 usage error.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

/// Runs one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qsr::cli
