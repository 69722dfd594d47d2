// errors.hpp — exception hierarchy shared by the library and the CLI.

#pragma once

#include <stdexcept>
#include <string>

namespace duffing {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration; the CLI maps these to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Fock truncation cannot represent the requested physics.
class TruncationError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Anything that goes wrong while computing; exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Trace or positivity drift during propagation.
class InstabilityError : public NumericalError {
public:
    InstabilityError(const std::string& what, double time)
        : NumericalError(what + " (t=" + std::to_string(time) + ")"), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

// Phase-space grid does not contain the state.
class GridError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// SAS/LAS basins overlap too much for a clean two-state decomposition.
class OverlapError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Population data with no escape stage.
class NoEscapeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Three-point data inconsistent with a two-state rate process.
class NonExponentialError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Scaling fit needs at least four records spanning a factor two in eta.
class InsufficientSpanError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace duffing
