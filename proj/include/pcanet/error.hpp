#pragma once

#include <stdexcept>
#include <string>

namespace pcanet {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid, resolution, or vector-length mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values (dimensions, cutoffs, rates).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (e.g. a <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Solver non-convergence, blow-up, or rank deficiency.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Bad command-line usage or unreadable input files.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcanet
