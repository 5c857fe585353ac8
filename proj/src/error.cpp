#include "adaptune/error.hpp"

namespace adaptune {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LabelDomainError: return "LabelDomainError";
    case ErrorCode::ZeroNormEmbedding: return "ZeroNormEmbedding";
    case ErrorCode::ZeroNormVector: return "ZeroNormVector";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::IdentityInitInfeasible: return "IdentityInitInfeasible";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::ScheduleMismatch: return "ScheduleMismatch";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::AllUndefined: return "AllUndefined";
    case ErrorCode::EmptyReport: return "EmptyReport";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    }
    return "UnknownError";
}

ErrorCategory error_category(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::IdentityInitInfeasible:
        return ErrorCategory::Config;
    case ErrorCode::NonFiniteGradient:
        return ErrorCategory::Numeric;
    default:
        return ErrorCategory::Data;
    }
}

}  // namespace adaptune
