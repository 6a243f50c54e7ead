#pragma once

#include <stdexcept>
#include <string>

namespace eqpart {

// Violated precondition: argument outside its documented domain
// (probabilities outside (0,1), non-SPD matrices, empty intervals, ...).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A conditioning step was asked to work with fewer observations than the
// estimator needs.
class InsufficientDataError : public DomainError {
public:
    explicit InsufficientDataError(const std::string& msg) : DomainError(msg) {}
};

// An iterative solver stopped without reaching its tolerance.  The message
// carries the best iterate and residual seen.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file; message names the file, line and column.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// I/O failure (unreadable path, write error); message names the path.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace eqpart
