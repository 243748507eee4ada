#pragma once
// Error codes shared by all modules.

#include <stdexcept>
#include <string>

namespace hs {

enum class ErrorCode {
    OutOfImage,
    OutsideWindow,
    DegenerateInterval,
    OverlappingSupports,
    LeafMiss,
    EscapedOrbit,
    CarrierMismatch,
    DepthExhausted,
    SearchFailed,
    BudgetTooLarge,
    NoFundamentalBridge,
    PrecisionExhausted,
    WindowEmpty,
    IntersectionNotBracketed,
    SupportsOverlap,
    InclusionFailed,
    OrbitTooShort,
    OrbitEscaped,
    SampleEscaped,
    LengthMismatch,
    EraConditionViolated,
    ConfigParse,
    InvalidParameters,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::OutOfImage: return "OutOfImage";
    case ErrorCode::OutsideWindow: return "OutsideWindow";
    case ErrorCode::DegenerateInterval: return "DegenerateInterval";
    case ErrorCode::OverlappingSupports: return "OverlappingSupports";
    case ErrorCode::LeafMiss: return "LeafMiss";
    case ErrorCode::EscapedOrbit: return "EscapedOrbit";
    case ErrorCode::CarrierMismatch: return "CarrierMismatch";
    case ErrorCode::DepthExhausted: return "DepthExhausted";
    case ErrorCode::SearchFailed: return "SearchFailed";
    case ErrorCode::BudgetTooLarge: return "BudgetTooLarge";
    case ErrorCode::NoFundamentalBridge: return "NoFundamentalBridge";
    case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorCode::WindowEmpty: return "WindowEmpty";
    case ErrorCode::IntersectionNotBracketed: return "IntersectionNotBracketed";
    case ErrorCode::SupportsOverlap: return "SupportsOverlap";
    case ErrorCode::InclusionFailed: return "InclusionFailed";
    case ErrorCode::OrbitTooShort: return "OrbitTooShort";
    case ErrorCode::OrbitEscaped: return "OrbitEscaped";
    case ErrorCode::SampleEscaped: return "SampleEscaped";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EraConditionViolated: return "EraConditionViolated";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace hs
