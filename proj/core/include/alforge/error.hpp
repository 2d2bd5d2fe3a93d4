#pragma once

#include <stdexcept>
#include <string>

namespace alforge {

/// Raised when a caller breaks an operation's preconditions (bad dimensions,
/// out-of-range indices, invalid configuration values).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation cannot proceed on valid-looking inputs, e.g. a
/// diverging optimizer or an undefined conditional probability.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File and format failures (missing snapshots, malformed CSV/JSON).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

}  // namespace alforge
