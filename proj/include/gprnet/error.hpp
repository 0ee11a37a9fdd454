#pragma once

#include <stdexcept>
#include <string>

namespace gprnet {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (OFF, XYZ, checkpoint, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A precondition on arguments was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a numerically degenerate input.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Configuration is inconsistent (bad key, checkpoint/flag mismatch).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File system failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gprnet
