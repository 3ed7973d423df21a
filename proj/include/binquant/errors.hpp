#pragma once

#include <stdexcept>
#include <string>

namespace binquant {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the documented domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An AR order of zero was passed to an operation that needs the
/// autoregressive structure (companion matrix, spectral radius, ...).
class DegenerateFir : public Error {
public:
    using Error::Error;
};

/// A numerical routine (eigensolver, SVD) failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The companion matrix has spectral radius >= 1.
class UnstableSystem : public Error {
public:
    using Error::Error;
};

/// An operation was called before the object reached the required state.
class StateError : public Error {
public:
    using Error::Error;
};

/// The sufficient convergence condition is not positive, so no step size
/// is certified by the rate theorem.
class ConditionViolated : public Error {
public:
    using Error::Error;
};

/// A configuration file is malformed or inconsistent. The message always
/// starts with the path of the offending field.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : Error(field + ": " + message), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace binquant
