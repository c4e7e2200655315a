#pragma once

#include <stdexcept>
#include <string>

namespace flowcast {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration values (bad layer dims, non-positive rates, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatch between states, parameters, or files.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// API misuse: empty batch, wrong field kind, unknown generator name.
class UsageError : public Error {
public:
    using Error::Error;
};

/// File IO and container-format problems.
class IoError : public Error {
public:
    using Error::Error;
};

/// Numerical blow-up during integration. The message names the failing
/// step/time and, for ensembles, the member index.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace flowcast
