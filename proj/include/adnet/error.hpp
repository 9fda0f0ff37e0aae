#pragma once

#include <stdexcept>
#include <string>

namespace adnet {

/// Base of every error thrown by the library. The CLI maps the concrete
/// subclass to a process exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid hyperparameters or mismatched tensor shapes.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Well-formed but unusable data (empty dataset, dimension mismatch, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents. Messages carry the path and a byte offset or field name.
class FormatError : public Error {
public:
    using Error::Error;
};

/// API misuse, e.g. backward on an empty tape.
class UsageError : public Error {
public:
    using Error::Error;
};

/// NaN or Inf detected in a computed quantity.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A metric that is undefined for the given input (single-class AUC).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Broken internal invariant.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace adnet
