#ifndef TYPICLASS_ERROR_HPP
#define TYPICLASS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace typiclass {

/// Bad or insufficient input data. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller asked for more distinct items than exist.
class InsufficientData : public DataError {
 public:
  using DataError::DataError;
};

/// A document has no in-vocabulary tokens and cannot be embedded.
class UnembeddableDocument : public DataError {
 public:
  using DataError::DataError;
};

/// A category has no seed documents, so its typicality is undefined.
class UndetectableCategory : public DataError {
 public:
  using DataError::DataError;
};

/// Stored artifact does not match its recorded checksum.
class StaleArtifact : public DataError {
 public:
  using DataError::DataError;
};

/// Internal consistency check failed. Maps to CLI exit code 3.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace typiclass

#endif  // TYPICLASS_ERROR_HPP
