#pragma once

#include <stdexcept>
#include <string>

namespace pdrls {

/// Invalid configuration or inputs that fail module-level validation.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested computation exceeds the supported size bounds.
struct ResourceError : ConfigError {
    using ConfigError::ConfigError;
};

/// Quantity requested outside its mathematical domain (e.g. steady-state
/// theory at lambda = 1).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A validation run (moment oracle) found a mismatch.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace pdrls
