#pragma once

#include <stdexcept>
#include <string>

namespace hsns {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine received non-finite data or could not meet its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or inconsistent shapes.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsns
