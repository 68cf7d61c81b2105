#pragma once

#include <stdexcept>
#include <string>

namespace wdm {

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violated a documented precondition (bad shape, out-of-range t, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File could not be read, written or decoded.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A numeric computation produced NaN/Inf (diverged training, unstable sampling).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace wdm
