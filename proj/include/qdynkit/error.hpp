#pragma once

#include <stdexcept>
#include <string>

namespace qdk {

/// Root of the library's exception hierarchy. The CLI maps each subclass onto
/// an exit code (config 2, numeric 3, I/O 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: bad parameter values, unknown names, missing fields.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Array length or tensor shape does not match the grid it is used with.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a tabulated function.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Non-convergence or loss of accuracy in a numerical algorithm.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Combination of features that is valid input but not supported.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Problem size exceeds a configured cap.
class ResourceError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace qdk
