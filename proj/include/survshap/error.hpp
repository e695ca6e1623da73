#pragma once

#include <stdexcept>
#include <string>

namespace survshap {

/// Input violates a precondition: malformed data, bad parameters, schema
/// mismatch. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a result (non-convergence,
/// singular system, failed root bracket). The CLI maps this to exit code 3.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace survshap
