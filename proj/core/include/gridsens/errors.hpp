#pragma once

#include <stdexcept>
#include <string>

namespace gridsens {

/// Bad user input: malformed case files, dangling references, missing files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& message, int line)
      : InputError("line " + std::to_string(line) + ": " + message), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Numerical failure: divergence, singular systems, islanding.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularMatrixError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An outage splits the network; no finite linear outage model exists.
class IslandingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace gridsens
