#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metalcast {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data problems. The CLI maps these to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line)
        : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IntegrityError : public DataError {
public:
    using DataError::DataError;
};

class FirstReleaseError : public DataError {
public:
    using DataError::DataError;
};

class CoverageError : public DataError {
public:
    using DataError::DataError;
};

class MissingVintageError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

// Configuration / validation problems. The CLI maps these to exit code 1.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Numerical and estimation failures; these abort a single model cell.
class DomainError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class RankError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class SamplerError : public Error {
public:
    using Error::Error;
};

class DegenerateColumnError : public Error {
public:
    using Error::Error;
};

class DegenerateTestError : public Error {
public:
    using Error::Error;
};

class EmptySampleError : public Error {
public:
    using Error::Error;
};

class IncompleteFanError : public Error {
public:
    using Error::Error;
};

}  // namespace metalcast
