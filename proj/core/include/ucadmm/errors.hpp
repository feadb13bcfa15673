#pragma once

#include <stdexcept>
#include <string>

namespace ucadmm {

/// Malformed input text (case files, scenario files, CSV).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input parsed but violates a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver produced or encountered a non-finite or singular quantity.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The ADMM engine gave up (kernel failure, divergence).
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ucadmm
