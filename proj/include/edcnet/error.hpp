#ifndef EDCNET_ERROR_HPP
#define EDCNET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace edcnet {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller passed something unusable (bad sizes, out-of-range knobs).
struct ArgumentError : Error {
  using Error::Error;
};

// Math preconditions violated (negative energy, absorption outside (0,1), ...).
struct DomainError : Error {
  using Error::Error;
};

// A file is not what it claims to be.
struct FormatError : Error {
  using Error::Error;
};
struct VersionError : FormatError {
  using FormatError::FormatError;
};
struct ShapeError : FormatError {
  using FormatError::FormatError;
};
struct TruncatedError : FormatError {
  using FormatError::FormatError;
};

// Semantic invariants violated (overlapping splits, inconsistent manifest).
struct ValidationError : Error {
  using Error::Error;
};

// Rejection sampling could not satisfy the configured constraints.
struct GenerationError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace edcnet

#endif
