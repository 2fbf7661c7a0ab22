#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace specdyn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition violated by caller-supplied data (shape, range, non-finite values).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Feature orthogonalization left no eigenpair above the drop threshold.
class DegenerateFeatures : public Error {
public:
    using Error::Error;
};

/// The Euler integrator produced a non-finite state.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Run configuration failed validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace specdyn
