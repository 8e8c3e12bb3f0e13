#pragma once

#include <stdexcept>
#include <string>

namespace nlsel {

/// Invalid input data: malformed files, out-of-contract arguments, shape
/// mismatches. Maps to CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric failure during computation (NaN loss, non-finite gradients,
/// degenerate ranges). Maps to CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace nlsel
