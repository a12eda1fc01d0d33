#pragma once

#include <stdexcept>
#include <string>

namespace scoreinv {

/// Base of every exception thrown by the library. The CLI maps the concrete
/// subclass to a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter is out of range or inconsistent.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes or container sizes do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN/Inf or otherwise diverged.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace scoreinv
