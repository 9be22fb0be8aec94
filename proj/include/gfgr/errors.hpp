#pragma once

#include <stdexcept>
#include <string>

namespace gfgr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-domain scalar parameter (t_bar <= 0, eta <= 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Operand shapes do not agree, or a configured dimension cap is exceeded.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input violates a structural invariant (non-Hermitian, not unit trace, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf or a failed decomposition during a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gfgr
