#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ddlr {

enum class ErrorKind {
    ZeroLeadingDenominator,
    NonInvertible,
    DegenerateLoop,
    BadPeriod,
    IoError,
    ParseError,
    TooFewSamples,
    DimensionMismatch,
    IllConditioned,
    NonFiniteCost,
    GridMismatch,
    InvalidArgument,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ZeroLeadingDenominator: return "ZeroLeadingDenominator";
    case ErrorKind::NonInvertible: return "NonInvertible";
    case ErrorKind::DegenerateLoop: return "DegenerateLoop";
    case ErrorKind::BadPeriod: return "BadPeriod";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NonFiniteCost: return "NonFiniteCost";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Raised by the least-squares solvers; keeps the condition estimate for diagnostics.
class IllConditionedError : public Error {
public:
    IllConditionedError(double condition, const std::string& message)
        : Error(ErrorKind::IllConditioned, message), condition_(condition) {}

    [[nodiscard]] double condition() const noexcept { return condition_; }

private:
    double condition_;
};

} // namespace ddlr
