#pragma once

#include <stdexcept>
#include <string>

namespace crnet {

/// Tensor shapes or channel counts do not agree.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// A configuration value is outside its legal range (even kernel, bad scale, ...).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A graph input or parameter was referenced but never bound.
class BindingError : public std::runtime_error {
public:
    explicit BindingError(const std::string& what) : std::runtime_error(what) {}
};

/// An API was called out of order (e.g. backward before forward).
class UsageError : public std::logic_error {
public:
    explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

/// Persisted data failed validation.
class ChecksumError : public std::runtime_error {
public:
    explicit ChecksumError(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be read or written, or has an unsupported layout.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crnet
