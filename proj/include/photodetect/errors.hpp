#pragma once

#include <stdexcept>
#include <string>

namespace photodetect {

// Invalid physical or numerical parameter supplied by the caller.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Grid does not cover the support of a state or the phase structure it must resolve.
class CoverageError : public ParameterError {
 public:
  explicit CoverageError(const std::string& what) : ParameterError(what) {}
};

// The model cannot be evaluated consistently for valid-looking input
// (truncation overflow, kernel violating the efficiency bound, zero trace, ...).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace photodetect
