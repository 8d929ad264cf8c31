#pragma once

#include <stdexcept>
#include <string>

namespace sizzle {

enum class ErrorKind { Validation, NonConvergence, Numerical };

// Base of everything the library throws on purpose. The kind picks the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct NonConvergenceError : Error {
    explicit NonConvergenceError(const std::string& what) : Error(ErrorKind::NonConvergence, what) {}
};

/// Singular detunings, unitarity drift and friends.
struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// 0 ok, 2 validation, 3 nonconvergence, 4 numerical.
int exit_code(ErrorKind kind) noexcept;

}  // namespace sizzle
