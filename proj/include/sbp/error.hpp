#pragma once

#include <stdexcept>
#include <string>

namespace sbp {

enum class ErrorCode {
  argument = 1,
  validation = 2,
  numerical = 3,
  io = 4,
};

// Every failure raised by the core carries one of the codes above; the C API
// maps them one-to-one onto sbp_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace sbp
