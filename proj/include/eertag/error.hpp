#pragma once

#include <stdexcept>
#include <string>

namespace eertag {

enum class ErrorCode {
  invalid_argument = 1,
  io_failure = 2,
  parse_error = 3,
  ungrammatical = 4,
  no_valid_path = 5,
  unsatisfiable = 6,
  missing_gold = 7,
  target_unreachable = 8,
  non_finite = 9,
  shape_mismatch = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace eertag
