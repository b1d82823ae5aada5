#pragma once

#include <stdexcept>
#include <string>

namespace lossroute {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: malformed instance files, violated invariants, inadmissible policies.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Instance document could not be parsed. Carries the 1-based line where it failed.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, int line)
        : ValidationError(what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Argument outside the domain of a numerical function.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SolverError : public Error {
public:
    using Error::Error;
};

/// A computed quantity violated an invariant by more than rounding can explain.
class NumericalError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Problem too large for the exact solvers.
class CapacityError : public Error {
public:
    using Error::Error;
};

} // namespace lossroute
