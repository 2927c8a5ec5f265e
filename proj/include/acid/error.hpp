#pragma once

#include <stdexcept>
#include <string>

namespace acid {

// Mirrors the status codes of the C API one to one.
enum class ErrorCode {
  invalid_argument = 1,
  invalid_config,
  disconnected,
  diverged,
  unsupported,
  io,
  deadlock,
  clock_regression,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what,
                    ErrorCode code = ErrorCode::invalid_argument) {
  if (!cond) throw Error(code, what);
}

}  // namespace acid
