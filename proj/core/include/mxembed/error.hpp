#pragma once

#include <stdexcept>
#include <string>

namespace mxembed {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input files.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during a forward pass or training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mxembed
