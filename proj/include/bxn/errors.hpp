#pragma once

#include <stdexcept>
#include <string>

namespace bxn {

/// Invalid user-supplied configuration (bad JSON, out-of-range settings,
/// inconsistent dimensions). Maps to the CONFIG error code at the C API.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure during computation (non-finite likelihood, degenerate
/// integrand, ...). Maps to the NUMERIC error code at the C API.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Programming-contract violation: a caller broke a documented precondition
/// (unknown coordinate name, empty draw set, indicator outside the model's
/// active components). These are bugs, not runtime conditions.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace bxn
