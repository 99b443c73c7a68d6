#pragma once

#include <stdexcept>
#include <string>

namespace outerlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition (dimension mismatch, |z| >= 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not reach its accuracy contract.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace outerlab
