#pragma once

#include <stdexcept>
#include <string>

namespace istratde {

enum class ErrorCode {
    EmptyPoolRestriction,
    PopulationTooSmall,
    InvalidBounds,
    InsufficientPopulation,
    DimensionMismatch,
    BudgetExhaustedBeforeInit,
    InvalidDistribution,
    UnsupportedDimension,
    TooFewIndividuals,
    SampleTooSmall,
    EmptySample,
    MismatchedProtocol,
    InvalidArgument,
    IoError
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::EmptyPoolRestriction: return "EmptyPoolRestriction";
    case ErrorCode::PopulationTooSmall: return "PopulationTooSmall";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::InsufficientPopulation: return "InsufficientPopulation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BudgetExhaustedBeforeInit: return "BudgetExhaustedBeforeInit";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::TooFewIndividuals: return "TooFewIndividuals";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::MismatchedProtocol: return "MismatchedProtocol";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), _code(code) {}

    ErrorCode code() const noexcept { return _code; }

private:
    ErrorCode _code;
};

} // namespace istratde
