#pragma once

#include <stdexcept>
#include <string>

namespace bloom {

/// Bad input: malformed corpus rows, unknown labels, inconsistent configs.
/// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-system failures (missing, unreadable, unwritable). Exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown during training (non-finite loss or gradient).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bloom
