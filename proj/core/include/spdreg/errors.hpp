#pragma once

#include <stdexcept>
#include <string>

namespace spdreg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite input, mismatched dimensions, bad parameter ranges.
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// A matrix function was applied outside its domain (e.g. Log of a
/// matrix that is not positive definite). Callers should project first.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Result would not be representable (exp overflow).
class RangeError : public Error {
public:
  using Error::Error;
};

/// Malformed file contents. The message names the offending line.
class FormatError : public Error {
public:
  FormatError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

/// An iterative method could not make progress.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

}  // namespace spdreg
