#pragma once

#include <stdexcept>
#include <string>

namespace codinet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor extents do not line up (matmul inner dims, channel counts, ...).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// API misuse, e.g. backward() on a non-scalar.
class UsageError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

/// A loss component went non-finite during training.
class DivergenceError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace codinet
