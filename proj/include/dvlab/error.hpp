#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dvlab {

enum class ErrorCode {
    NotPrime,
    InvalidParams,
    NonUnit,
    DimensionMismatch,
    RingMismatch,
    NotAnExtension,
    NotAlphaP,
    NotStable,
    NotIntegral,
    NotCSD,
    NotIsoclinic,
    PrecisionExhausted,
    InsufficientPrecision,
    NoStabilization,
    DescentFailed,
    BudgetExceeded,
    ParseError,
    Internal,
};

constexpr std::string_view code_name(ErrorCode c) noexcept
{
    switch (c) {
    case ErrorCode::NotPrime: return "NotPrime";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NonUnit: return "NonUnit";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RingMismatch: return "RingMismatch";
    case ErrorCode::NotAnExtension: return "NotAnExtension";
    case ErrorCode::NotAlphaP: return "NotAlphaP";
    case ErrorCode::NotStable: return "NotStable";
    case ErrorCode::NotIntegral: return "NotIntegral";
    case ErrorCode::NotCSD: return "NotCSD";
    case ErrorCode::NotIsoclinic: return "NotIsoclinic";
    case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorCode::InsufficientPrecision: return "InsufficientPrecision";
    case ErrorCode::NoStabilization: return "NoStabilization";
    case ErrorCode::DescentFailed: return "DescentFailed";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

/// The single exception type of the library; `code()` carries the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(code_name(code)) + ": " + detail), code_(code), detail_(detail)
    {
    }

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

inline void require(bool cond, ErrorCode code, const std::string& detail)
{
    if (!cond)
        fail(code, detail);
}

} // namespace dvlab
