#pragma once

#include <stdexcept>
#include <string>

namespace voltail {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The problem has no solution for the given inputs (e.g. a price outside the
/// no-arbitrage band).
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap. Carries the best bracket found.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double lo, double hi)
      : Error(what), bracket_lo(lo), bracket_hi(hi) {}
  double bracket_lo;
  double bracket_hi;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what), achieved_error(achieved) {}
  double achieved_error;
};

/// The implied density is negative where a computation needs it to be a
/// probability density.
class IntegrityError : public Error {
 public:
  IntegrityError(const std::string& what, double lo, double hi)
      : Error(what), x_lo(lo), x_hi(hi) {}
  double x_lo;
  double x_hi;
};

/// A least-squares fit (smile or tail) failed.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace voltail
