#pragma once

#include <stdexcept>
#include <string>

namespace tsemap {

/// Failure class. The CLI maps `validation` to exit code 1 and `io` to 2.
enum class ErrorKind { validation, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(const std::string& what) {
  throw Error(ErrorKind::validation, what);
}

[[noreturn]] inline void io_fail(const std::string& what) {
  throw Error(ErrorKind::io, what);
}

}  // namespace tsemap
