#pragma once

#include <stdexcept>
#include <string>

namespace stark {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (NaN, |w| too large, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A potential descriptor or configuration violates its admissibility rules.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Iterative or quadrature procedure failed to reach its target accuracy.
class NumericError : public Error {
public:
    using Error::Error;
};

/// No sign change of the shooting function could be bracketed.
class BracketError : public NumericError {
public:
    using NumericError::NumericError;
};

/// The computational domain is too short for the requested eigenpair.
class TruncationError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Too few usable samples for a regression.
class InsufficientDataError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Output files could not be written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace stark
