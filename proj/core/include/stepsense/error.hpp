#pragma once

#include <stdexcept>
#include <string>

namespace stepsense {

// Error categories map onto CLI exit codes: config=2, io=3, numeric=4.
enum class ErrorKind {
  InvalidArgument,
  Config,
  Io,
  Parse,
  Numeric,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace stepsense
