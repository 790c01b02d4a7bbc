#pragma once

#include <stdexcept>
#include <string>

namespace branchz {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input data, configuration, or file contents. CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Parse failure with a file location attached to the message.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, const std::string& file, size_t line)
      : ValidationError(file + ":" + std::to_string(line) + ": " + what) {}
  explicit ParseError(const std::string& what) : ValidationError(what) {}
};

/// Runtime failure while simulating or running a study. CLI exit code 2.
class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Not enough usable samples to produce an estimate. CLI exit code 3.
class EvidenceError : public Error {
 public:
  using Error::Error;
};

/// Regression design matrix is rank deficient (e.g. all f identical).
class SingularDesignError : public EvidenceError {
 public:
  using EvidenceError::EvidenceError;
};

}  // namespace branchz
