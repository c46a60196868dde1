#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dtshare {

// Base for every library error. CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input (files, flags, parameter values).
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class NotConnectedError : public InputError {
public:
    NotConnectedError() : InputError("graph not connected") {}
};

class DimensionMismatchError : public InputError {
public:
    using InputError::InputError;
};

// A requested object cannot exist under the given constraints.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

class InfeasibleSyncError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

class SaturatedError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

class NoFeasibleConfigError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

class NonConvergenceError : public Error {
public:
    using Error::Error;
};

class HistoryUnderflowError : public Error {
public:
    using Error::Error;
};

} // namespace dtshare
