#pragma once

#include <stdexcept>
#include <string>

namespace wavecpd {

enum class ErrorKind {
  invalid_argument,  // bad configuration or precondition violation
  format,            // wrong magic / malformed header
  truncated,         // payload shorter than the header promises
  mismatch,          // artifacts that cannot be used together
  instability,       // solver produced a non-finite value
  numeric,           // non-finite value in a model or its gradient
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::invalid_argument, what);
}

}  // namespace wavecpd
