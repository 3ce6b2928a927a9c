#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace memdex {

enum class ErrorCode {
  kInvalidArgument,
  kMissingFile,
  kParse,
  kDimensionMismatch,
  kDuplicateId,
  kNonFinite,
  kUnknownSubject,
  kEmptyIndex,
  kMissingModality,
  kMissingEvidence,
  kBinaryMismatch,
  kDegenerate,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as memdex::Error; the code lets callers and
// tests distinguish contract violations without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace memdex
