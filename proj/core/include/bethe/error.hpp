#pragma once

#include <stdexcept>
#include <string>

namespace bethe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: out-of-range dimensions, mismatched vector sizes.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed graph/model/marginals text. `line()` is 1-based, 0 if unknown.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, int line)
      : InputError(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Marginals outside the local polytope, or on its boundary where an interior
/// point is required.
class PolytopeError : public InputError {
 public:
  using InputError::InputError;
};

/// NaN/inf produced during a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure gave up before meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace bethe
