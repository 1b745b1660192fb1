#pragma once

#include <stdexcept>
#include <string>

namespace dress {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incompatible tensor/layer shapes or invalid geometry.
struct ShapeError : Error {
    using Error::Error;
};

// Non-finite values produced by a numeric kernel or optimizer step.
struct NumericError : Error {
    using Error::Error;
};

// Invalid configuration: bad ladder, indivisible row size, unknown keys.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed serialized data: bad magic, truncation, invariant violation.
struct FormatError : Error {
    using Error::Error;
};

}  // namespace dress
