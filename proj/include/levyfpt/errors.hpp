#pragma once

#include <stdexcept>
#include <string>

namespace levyfpt {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid model or contract parameters (out-of-range, wrong family, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the analyticity strip of a characteristic function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exponential moment required for the operation does not exist.
class MomentError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to reach the requested residual.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Root drifted to the inadmissible branch, or a branch cut was hit.
class BranchError : public Error {
 public:
  using Error::Error;
};

/// Quadrature truncation or noise exceeded tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Damping parameter incompatible with the payoff or the moment strip.
class DampingError : public Error {
 public:
  using Error::Error;
};

/// Perpetual exercise boundary undefined (Laplace root on wrong side of 1 or 0).
class BoundaryError : public Error {
 public:
  using Error::Error;
};

/// Inverse-CDF sampling table failed its monotonicity check.
class TableError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Option chain empty after filtering.
class EmptyChainError : public Error {
 public:
  using Error::Error;
};

/// Paired vectors of different lengths.
class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure while reading or writing.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace levyfpt
