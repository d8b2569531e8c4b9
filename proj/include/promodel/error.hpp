#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace promodel {

enum class ErrorCode {
    EmptyLabel,
    XorArityTooSmall,
    TooManyNoneMarkers,
    DegenerateLoop,
    EmptyDependencies,
    CycleInPartialOrder,
    SchemaError,
    ValidationFailed,
    ExplosionGuard,
    StateCapExceeded,
    InvariantViolated,
    NoCodeFound,
    ForbiddenSyntax,
    InterpretationError,
    EmptyDescription,
    EmptyFeedback,
    EmptyErrorText,
    ProviderFailure,
    Cancelled,
    PreconditionFailed,
    TemplateError,
    ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::EmptyLabel: return "EmptyLabel";
    case ErrorCode::XorArityTooSmall: return "XorArityTooSmall";
    case ErrorCode::TooManyNoneMarkers: return "TooManyNoneMarkers";
    case ErrorCode::DegenerateLoop: return "DegenerateLoop";
    case ErrorCode::EmptyDependencies: return "EmptyDependencies";
    case ErrorCode::CycleInPartialOrder: return "CycleInPartialOrder";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::ExplosionGuard: return "ExplosionGuard";
    case ErrorCode::StateCapExceeded: return "StateCapExceeded";
    case ErrorCode::InvariantViolated: return "InvariantViolated";
    case ErrorCode::NoCodeFound: return "NoCodeFound";
    case ErrorCode::ForbiddenSyntax: return "ForbiddenSyntax";
    case ErrorCode::InterpretationError: return "InterpretationError";
    case ErrorCode::EmptyDescription: return "EmptyDescription";
    case ErrorCode::EmptyFeedback: return "EmptyFeedback";
    case ErrorCode::EmptyErrorText: return "EmptyErrorText";
    case ErrorCode::ProviderFailure: return "ProviderFailure";
    case ErrorCode::Cancelled: return "Cancelled";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::TemplateError: return "TemplateError";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

// Base of every exception thrown by the library. The code is stable and
// machine-readable; what() is meant for humans (and for error prompts).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace promodel
