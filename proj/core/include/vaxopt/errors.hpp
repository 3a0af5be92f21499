#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vaxopt {

/// Tensor/vector dimensions do not agree.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (files, records, series).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A non-finite value appeared during training or simulation.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t index)
        : std::runtime_error(what), index_(index) {}

    /// Epoch / iteration / step at which the failure was detected.
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

} // namespace vaxopt
