#pragma once

#include <stdexcept>
#include <string>

namespace dml {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension/shape mismatches between operands.
struct ShapeError : Error {
    using Error::Error;
};

// Bad user-supplied configuration (keys, ranges, schedules).
struct ConfigError : Error {
    using Error::Error;
};

// Degenerate or non-finite numeric input/output.
struct NumericError : Error {
    using Error::Error;
};

// API misuse: reused backward cache, oversized enqueue, probe mismatch.
struct ContractError : Error {
    using Error::Error;
};

// Filesystem problems (missing/unwritable paths).
struct IoError : Error {
    using Error::Error;
};

// Malformed file contents (text parse failures carry line numbers).
struct ParseError : Error {
    using Error::Error;
};

// Binary artifact violations (magic, truncation, header/payload mismatch).
struct FormatError : Error {
    using Error::Error;
};

}  // namespace dml
