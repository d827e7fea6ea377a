#pragma once

#include <stdexcept>
#include <string>

namespace nfcast {

/// Base error for every recoverable failure in the library. Messages are
/// meant to be shown to the user as-is.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when inputs violate a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when training diverges (loss becomes non-finite).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace nfcast
