#pragma once

#include <stdexcept>

namespace compobs {

/// Base class of every exception thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A matrix/vector dimension is out of range or inconsistent with its peers.
struct DimensionError : Error {
  using Error::Error;
};

/// A scalar parameter (scale, decay constant, tolerance, ...) is outside its
/// admissible domain.
struct ParameterError : Error {
  using Error::Error;
};

/// The supplied matrix or model violates a structural requirement
/// (symmetry, positive semidefiniteness, orthogonality, ...).
struct ModelError : Error {
  using Error::Error;
};

/// A statistic is undefined for the given input (e.g. zero total energy).
struct StatisticError : Error {
  using Error::Error;
};

/// An experiment configuration is missing, malformed, or self-inconsistent.
struct ConfigError : Error {
  using Error::Error;
};

/// Reading or writing a file failed.
struct IoError : Error {
  using Error::Error;
};

}  // namespace compobs
