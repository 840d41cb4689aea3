#pragma once

#include <stdexcept>
#include <string>

namespace gaca {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand extents do not agree.
struct DimensionError : Error {
  using Error::Error;
};

/// A tunable or argument violates its contract.
struct ConfigError : Error {
  using Error::Error;
};

/// Caller broke an API precondition (e.g. non-scalar loss).
struct ContractError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct TrainingError : Error {
  using Error::Error;
};

}  // namespace gaca
