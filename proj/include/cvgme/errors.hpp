#pragma once

#include <stdexcept>
#include <string>

namespace cvgme {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// mode count or cutoff mismatch
struct DimensionError : Error {
  using Error::Error;
};

struct NullStateError : Error {
  using Error::Error;
};

// oracle budget or truncation headroom exceeded
struct ResourceError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct UnsupportedError : Error {
  using Error::Error;
};

struct ContractViolation : Error {
  using Error::Error;
};

struct ConfigurationError : Error {
  using Error::Error;
};

struct BracketError : Error {
  using Error::Error;
};

}  // namespace cvgme
