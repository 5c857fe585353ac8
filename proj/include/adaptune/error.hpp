#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adaptune {

enum class ErrorCode {
    ConfigError,
    MissingFile,
    IoError,
    DimensionMismatch,
    LabelDomainError,
    ZeroNormEmbedding,
    ZeroNormVector,
    TooFewRows,
    ShapeMismatch,
    StaleCache,
    IdentityInitInfeasible,
    EmptyMask,
    ScheduleMismatch,
    DegenerateLabels,
    AllUndefined,
    EmptyReport,
    NonFiniteGradient,
};

// Broad failure class; the CLI maps these onto exit codes 2/3/4.
enum class ErrorCategory { Config, Data, Numeric };

std::string_view error_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }
    ErrorCategory category() const noexcept { return error_category(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace adaptune
