#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace homog {

/// Base class of every exception thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Expression syntax / unknown-identifier error. Carries the byte offset
/// into the source string at which the problem was detected.
class ParseError : public Error {
public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Evaluation failure: unbound variable or arithmetic domain error
/// (division by zero, sqrt of a negative number, non-finite result).
class EvalError : public Error {
public:
  using Error::Error;
};

/// A sampled coefficient fell below its positivity floor.
class EllipticityError : public Error {
public:
  using Error::Error;
};

/// Two objects that must describe the same cell/grid do not match.
class MismatchError : public Error {
public:
  using Error::Error;
};

/// Iterative solver or quadrature failed to reach the requested tolerance,
/// or a resolution precondition was violated.
class SolverError : public Error {
public:
  using Error::Error;
};

/// Experiment configuration is missing, malformed, or fails validation.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace homog
