// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ctcf {

/// Error categories. The CLI maps each category to a distinct exit code.
enum class ErrorKind {
  InvalidArgument = 2,
  ShapeMismatch = 3,
  MissingFile = 4,
  MalformedFile = 5,
  NumericFailure = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::ShapeMismatch: return "shape_mismatch";
    case ErrorKind::MissingFile: return "missing_file";
    case ErrorKind::MalformedFile: return "malformed_file";
    case ErrorKind::NumericFailure: return "numeric_failure";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace ctcf
