#pragma once

#include <stdexcept>
#include <string>

namespace fingraph {

/// Base class for every error this library raises on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matrix dimension mismatch; the message names both shapes.
struct ShapeError : Error {
    using Error::Error;
};

/// Mathematically invalid input (empty reduction, zero vector, k > N, ...).
struct DomainError : Error {
    using Error::Error;
};

/// Malformed file content; the message carries row/column context.
struct ParseError : Error {
    using Error::Error;
};

/// Semantically inconsistent data (conflicting duplicates, non-positive
/// close, missing boundary prices, universe mismatch, ...).
struct DataError : Error {
    using Error::Error;
};

/// Iterative numeric procedure failed to converge.
struct NumericError : Error {
    using Error::Error;
};

/// Missing or unreadable file. Maps to CLI exit code 2.
struct FileError : Error {
    using Error::Error;
};

/// Invalid run configuration. Maps to CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace fingraph
