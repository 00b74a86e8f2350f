#include "apgdiag/error.hpp"

namespace apgdiag {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::UnknownTablespace: return "UnknownTablespace";
        case ErrorCode::DanglingConnection: return "DanglingConnection";
        case ErrorCode::CyclicPlan: return "CyclicPlan";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::WrongKind: return "WrongKind";
        case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
        case ErrorCode::IrregularSampling: return "IrregularSampling";
        case ErrorCode::DuplicateRunId: return "DuplicateRunId";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::EmptyWindow: return "EmptyWindow";
        case ErrorCode::InsufficientHistory: return "InsufficientHistory";
        case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
        case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::DuplicateCauseId: return "DuplicateCauseId";
        case ErrorCode::InvalidPredicate: return "InvalidPredicate";
        case ErrorCode::UnknownRun: return "UnknownRun";
        case ErrorCode::NonPositiveDelta: return "NonPositiveDelta";
        case ErrorCode::InvalidScenario: return "InvalidScenario";
        case ErrorCode::InconsistentFaultTarget: return "InconsistentFaultTarget";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

}  // namespace apgdiag
