#pragma once

#include <stdexcept>
#include <string>

namespace iamcf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector or matrix size does not match the dimension of the object it is applied to.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Raised by derivative evaluations at (or numerically at) the origin.
class DegenerateGradient : public Error {
public:
    using Error::Error;
};

/// Invalid geometry: obstacle outside the box, disconnected interior, inverted mesh cells.
class DomainError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

/// Configuration problem. `where` names the offending field (JSON pointer) or
/// the line/column of a syntax error.
class ConfigError : public Error {
public:
    ConfigError(std::string where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

} // namespace iamcf
