#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace apgdiag {

enum class ErrorCode {
    ParseError,
    SchemaViolation,
    UnknownTablespace,
    DanglingConnection,
    CyclicPlan,
    UnknownNode,
    WrongKind,
    NonMonotoneTimestamps,
    IrregularSampling,
    DuplicateRunId,
    IoFailure,
    EmptyInput,
    EmptyWindow,
    InsufficientHistory,
    FingerprintMismatch,
    InsufficientOverlap,
    ZeroVariance,
    DuplicateCauseId,
    InvalidPredicate,
    UnknownRun,
    NonPositiveDelta,
    InvalidScenario,
    InconsistentFaultTarget,
    InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// All module failures surface as this exception; callers switch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace apgdiag
