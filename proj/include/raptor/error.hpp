#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace raptor {

enum class ErrorCode {
  kParse,
  kIo,
  kInvalidArgument,
  kConstantInput,
  kLengthMismatch,
  kEmptyDirection,
  kEmptyInput,
  kOutOfOrder,
  kMissingPath,
  kEmptyPath,
  kNoAdmissibleGuard,
  kInvalidScenario,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for every analysis failure; `code()` identifies
/// which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace raptor
