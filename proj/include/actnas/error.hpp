#pragma once

#include <stdexcept>
#include <string>

namespace actnas {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad model/profile/table files, inconsistent shapes,
/// invalid arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A search found no assignment that satisfies its constraints.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

/// An estimator failed while building a benchmark table. Carries the
/// offending (layer, activation) in the message.
class EstimatorError : public Error {
 public:
  using Error::Error;
};

/// A cost table required by a command is not available.
class MissingTableError : public Error {
 public:
  using Error::Error;
};

}  // namespace actnas
