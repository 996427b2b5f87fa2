#pragma once

#include <stdexcept>
#include <string>

namespace sboost {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent or invalid user configuration (mismatched lengths, bad keys).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Factorization or solve failed beyond the jitter tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line` is 1-based; 0 when not line-specific.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace sboost
