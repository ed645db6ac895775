#pragma once

#include <stdexcept>
#include <string>

namespace srmd {

enum class ErrorKind {
  InvalidArgument,
  Input,
  NotConverged,
  Degenerate,
};

/// Library-wide exception. The kind lets front ends map failures onto exit
/// codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void invalid_argument(const std::string& what) {
  throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace srmd
