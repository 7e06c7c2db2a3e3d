#pragma once

#include <stdexcept>
#include <string>

namespace ncdecay {

/// Base of every error raised by the library. Carries the name of the
/// module that detected the problem so the harness can attribute failures.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& message)
        : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// A documented precondition of an operation was violated by the caller.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical procedure (quadrature, linear solve, eigensolve, search)
/// did not reach its target.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

}  // namespace ncdecay
