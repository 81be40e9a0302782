#pragma once

#include <stdexcept>
#include <string>

namespace pixagg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape/rank/dimension contract violations.
struct ShapeError : Error {
    using Error::Error;
};

// Malformed rigid grid (even extent, bad dimensionality).
struct GridError : Error {
    using Error::Error;
};

// Group partition that does not evenly divide the sample count.
struct PartitionError : Error {
    using Error::Error;
};

// Negative or otherwise invalid noise parameters.
struct ParamError : Error {
    using Error::Error;
};

// Nonfinite or otherwise unusable field values.
struct InputError : Error {
    using Error::Error;
};

// File I/O and parse failures.
struct IoError : Error {
    using Error::Error;
};

// Bad CLI/config input.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace pixagg
