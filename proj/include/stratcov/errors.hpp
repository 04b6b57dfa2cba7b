#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stratcov {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NotPositiveDefinite : Error {
    using Error::Error;
};

/// An iterative solver hit its iteration cap. Carries the best iterate seen
/// so the caller can inspect or continue from it.
struct MaxIterExceeded : Error {
    MaxIterExceeded(const std::string& msg, std::vector<double> best_iterate, double res)
        : Error(msg), best(std::move(best_iterate)), residual(res) {}
    std::vector<double> best;
    double residual = 0.0;
};

struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line_no)
        : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    std::size_t line = 0;
};

struct RangeError : Error {
    using Error::Error;
};

struct GraphError : Error {
    using Error::Error;
};

struct DegenerateCycle : GraphError {
    using GraphError::GraphError;
};

struct EmptySeries : Error {
    using Error::Error;
};

struct EmptyDataset : Error {
    using Error::Error;
};

struct SingleClass : Error {
    using Error::Error;
};

struct ZeroSteering : Error {
    using Error::Error;
};

struct LineSearchFailure : Error {
    using Error::Error;
};

/// Internal invariant violation (a defect, not a user error).
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace stratcov
