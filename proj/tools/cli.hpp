#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace matscire::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kProcessingError = 1;
inline constexpr int kUsageError = 2;

// Runs the command suite on `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace matscire::cli
