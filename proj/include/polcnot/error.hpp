#pragma once

#include <stdexcept>
#include <string>

namespace polcnot {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (non-finite angle, T <= 0, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The coarse calibration scan found no cell with residual below pi/4.
class NoSolutionInBounds : public Error {
 public:
  using Error::Error;
};

/// Local refinement used up its evaluation budget before reaching tolerance.
class EvaluationCapExceeded : public Error {
 public:
  using Error::Error;
};

/// Reading or writing an output/scenario file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail

}  // namespace polcnot
