#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace garchdiag {

enum class ErrorCode {
    NegativeCoefficient,
    BetaSumExceedsRho0,
    OutsideBox,
    DofTooSmall,
    NonstationaryParams,
    BetaSumAtLeastOne,
    StepTooLarge,
    SeriesTooShort,
    DegenerateSample,
    DegenerateNu2,
    CorrectionDomain,
    DegenerateVariance,
    NonpositiveBandwidth,
    ParseError,
    TooShort,
    NonFiniteValue,
    InvalidArgument,
    UsageError,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NegativeCoefficient: return "NegativeCoefficient";
        case ErrorCode::BetaSumExceedsRho0: return "BetaSumExceedsRho0";
        case ErrorCode::OutsideBox: return "OutsideBox";
        case ErrorCode::DofTooSmall: return "DofTooSmall";
        case ErrorCode::NonstationaryParams: return "NonstationaryParams";
        case ErrorCode::BetaSumAtLeastOne: return "BetaSumAtLeastOne";
        case ErrorCode::StepTooLarge: return "StepTooLarge";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::DegenerateSample: return "DegenerateSample";
        case ErrorCode::DegenerateNu2: return "DegenerateNu2";
        case ErrorCode::CorrectionDomain: return "CorrectionDomain";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::NonpositiveBandwidth: return "NonpositiveBandwidth";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UsageError: return "UsageError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// message names the offending coordinate, row or flag where there is one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace garchdiag
