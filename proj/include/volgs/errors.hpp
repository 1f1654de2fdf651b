#pragma once

#include <stdexcept>
#include <string>

namespace volgs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-domain parameter values.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A quaternion with zero norm cannot describe a rotation.
class DegenerateRotationError : public Error {
 public:
  using Error::Error;
};

class InitializationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf found in a gradient or loss. The message names the offending group.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File-format and filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace volgs
