#pragma once

#include <iosfwd>

namespace ccm::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kNotConverged = 2;
inline constexpr int kNotCertified = 3;

/// Entry point of the `ccm` tool, separated from main() so tests can drive it.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ccm::cli
