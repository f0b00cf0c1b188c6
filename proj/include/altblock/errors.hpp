#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace altblock {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed user-supplied configuration (flags, sizes, weights).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line-specific.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DimensionMismatch : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class PartitionSizeMismatch : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class NotSymmetric : public Error {
public:
    using Error::Error;
};

/// A NaN or Inf appeared in an iterate.
class NonFiniteValue : public Error {
public:
    NonFiniteValue(std::size_t iteration, std::string matrix)
        : Error("non-finite value in " + matrix + " at iteration " + std::to_string(iteration)),
          iteration_(iteration),
          matrix_(std::move(matrix)) {}

    std::size_t iteration() const noexcept { return iteration_; }
    const std::string& matrix() const noexcept { return matrix_; }

private:
    std::size_t iteration_;
    std::string matrix_;
};

class AllRunsFailed : public Error {
public:
    using Error::Error;
};

}  // namespace altblock
