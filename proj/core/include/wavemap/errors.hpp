#pragma once

#include <stdexcept>
#include <string>

namespace wavemap {

// Bad user-supplied input: malformed ranges, out-of-domain parameters,
// inconsistent option combinations.  Maps to process exit code 2.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver failed to converge or a time evolution went unstable.  The
// message carries enough state (iteration counts, residuals, growth
// factors) to diagnose the failure.  Maps to process exit code 3.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wavemap
