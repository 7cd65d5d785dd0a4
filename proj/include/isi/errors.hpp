#pragma once

#include <stdexcept>
#include <string>

namespace isi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Mismatched or invalid dimensions.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A value violates the invariants of its domain type (norm, trace, PSD, ...).
class InvalidStateError : public Error {
public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
public:
  using Error::Error;
};

/// A configured size cap would be exceeded.
class CapExceededError : public Error {
public:
  using Error::Error;
};

/// The spectrum is degenerate and the operation requires it not to be.
class DegenerateSpectrumError : public Error {
public:
  DegenerateSpectrumError(const std::string& what, long level_a, long level_b)
      : Error(what), level_a_(level_a), level_b_(level_b) {}

  long level_a() const noexcept { return level_a_; }
  long level_b() const noexcept { return level_b_; }

private:
  long level_a_;
  long level_b_;
};

class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// A Monte Carlo functional produced NaN or infinity.
class NonFiniteError : public Error {
public:
  using Error::Error;
};

/// Experiment configuration could not be parsed or validated.
class ConfigError : public Error {
public:
  ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(what), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  int line_;
  int column_;
};

}  // namespace isi
