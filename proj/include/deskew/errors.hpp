#pragma once

#include <stdexcept>
#include <string>

namespace deskew {

/// Configuration file problems (missing fields, invalid calibration, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (scan/measurement files, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure (indefinite covariance after regularization, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace deskew
