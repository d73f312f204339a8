#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rasp {

// Codes travel on the wire inside Error messages, so values are stable.
enum class ErrorCode : std::uint32_t {
  kInvalidArgument = 1,
  kSingularMatrix = 2,
  kRetryBudgetExhausted = 3,
  kConstantColumn = 4,
  kMalformedMessage = 5,
  kVersionMismatch = 6,
  kOversizedQuery = 7,
  kNeedLargerUpperBound = 8,
  kIo = 9,
  kUnknownCategory = 10,
  kCrypto = 11,
  kWhiteningFailure = 12,
  kInternal = 13,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Throws Error(code, message) when cond is false.
inline void enforce(bool cond, ErrorCode code, const std::string& message) {
  if (!cond) throw Error(code, message);
}

}  // namespace rasp
