#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace n2m {

enum class ErrorCode {
    InvalidArgument,
    SupportMismatch,
    UnknownTag,
    AbstractModeUnsupported,
    NoCrossing,
    PreconditionViolated,
    SearchBracketInvalid,
    NoConvergence,
    RuleMismatch,
    ParseError,
    ValidationError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::SupportMismatch: return "SUPPORT_MISMATCH";
    case ErrorCode::UnknownTag: return "UNKNOWN_TAG";
    case ErrorCode::AbstractModeUnsupported: return "ABSTRACT_MODE_UNSUPPORTED";
    case ErrorCode::NoCrossing: return "NO_CROSSING";
    case ErrorCode::PreconditionViolated: return "PRECONDITION_VIOLATED";
    case ErrorCode::SearchBracketInvalid: return "SEARCH_BRACKET_INVALID";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::RuleMismatch: return "RULE_MISMATCH";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::ValidationError: return "VALIDATION_ERROR";
    case ErrorCode::IoError: return "IO_ERROR";
    }
    return "UNKNOWN";
}

/// Library error. The code is stable and machine-checkable; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

}  // namespace n2m
