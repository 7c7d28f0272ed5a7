#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stablelike {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Argument sits on a pole (e.g. Gamma at a non-positive integer).
class PoleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Result not representable as a finite double.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// An iterative procedure ran out of budget before meeting its bound.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double achieved_error, std::size_t iterations)
        : Error(what), achieved_error_(achieved_error), iterations_(iterations) {}
    double achieved_error() const noexcept { return achieved_error_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double achieved_error_;
    std::size_t iterations_;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ResourceLimitError : public Error {
public:
    using Error::Error;
};

/// Parse failure in a coefficient expression or a symbol file.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset, std::vector<std::string> expected)
        : Error(what), offset_(offset), expected_(std::move(expected)) {}
    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

/// Run-time evaluation failure of an expression; carries the offending x.
class EvalDomainError : public DomainError {
public:
    EvalDomainError(const std::string& what, double x) : DomainError(what), x_(x) {}
    double x() const noexcept { return x_; }

private:
    double x_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace stablelike
