// errors.hpp: Exception types shared across the library.

#pragma once

#include <stdexcept>
#include <string>

namespace ccspin {

// Input rejected before any numerics run (CLI exit code 2).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation failed to meet its accuracy contract (CLI exit code 1).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class BasisMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace ccspin
