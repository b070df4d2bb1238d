#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccd {

/// Raised when an API is called outside its contract (wrong query kind,
/// empty point set, unknown method name, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition on numeric input does not hold.
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Bisection cannot make progress on a box (all widths or stretch factors zero).
class DegenerateBoxError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The line search could not validate a positive separation ratio.
class InfeasibleStepError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t row, const std::string& what)
        : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}

    /// Zero-based row index in the input where the problem was detected.
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ccd
