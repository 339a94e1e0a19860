#pragma once
#include <stdexcept>
#include <string>

namespace pagerec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or feature-count mismatch; message names the offending axes.
struct DimensionError : Error {
  using Error::Error;
};

// Inconsistent layer chains, bad hyper-parameters, unknown config keys.
struct ConfigError : Error {
  using Error::Error;
};

// Non-finite values where finite ones are required.
struct NumericError : Error {
  using Error::Error;
};

// File / stream problems; message names the file.
struct IoError : Error {
  using Error::Error;
};

// Malformed corpus or checkpoint content; message carries file and line.
struct FormatError : IoError {
  using IoError::IoError;
};

// Target sequence cannot be aligned to the available frames.
struct InfeasibleAlignmentError : Error {
  using Error::Error;
};

}  // namespace pagerec
