#pragma once

#include <stdexcept>
#include <string>

namespace hazlab {

// Argument outside the mathematical domain of an operation (e.g. v <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent or unsatisfiable configuration (truncation budget, windows, ...).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical integral failed to converge or is infinite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cumulative hazard saturates below the requested level inside the window.
class HorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// (kernel, base measure, functional) combination that is not supported.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientSampleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hazlab
