#pragma once

#include <stdexcept>
#include <string>

namespace vdpo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state, action or augmented-state index outside its valid range.
class InvalidStateError : public Error {
public:
    using Error::Error;
};

/// A model violates a structural invariant (row sums, discount, sizes).
class ModelError : public Error {
public:
    using Error::Error;
};

/// The augmented state space is larger than the exact tier allows.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Arguments of incompatible shapes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// NaN or infinity where a finite number is required.
class NumericError : public Error {
public:
    using Error::Error;
};

/// An API used out of order, e.g. stepping a finished episode.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or file.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A training update produced a non-finite loss; carries the global step.
class TrainingAborted : public Error {
public:
    TrainingAborted(const std::string& what, long long step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    long long step() const noexcept { return step_; }

private:
    long long step_;
};

}  // namespace vdpo
