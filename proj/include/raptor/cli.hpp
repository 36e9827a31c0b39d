#pragma once

#include <iosfwd>

namespace raptor::cli {

/// Exit status for malformed or missing inputs.
inline constexpr int kInputError = 2;

/// Entry point shared by the binary and the tests. Findings never change the
/// exit status; only input errors do.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace raptor::cli
