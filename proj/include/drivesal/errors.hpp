#pragma once

#include <stdexcept>
#include <string>

namespace drivesal {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape disagreement between tensors or between a tensor and an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A call violated an operation's contract (bad flag, empty input, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Elementwise math outside its domain (log of non-positive, sigma <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid run or model configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or missing input data (files, CSV rows, manifests, lookups).
class DataError : public Error {
 public:
  using Error::Error;
};

// Input that is structurally valid but degenerate for the requested
// computation (zero variance, zero mass).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or failed numeric checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace drivesal
