#include "voterlab/errors.hpp"

namespace voterlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NodeOutOfRange: return "NodeOutOfRange";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InfeasibleDegree: return "InfeasibleDegree";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::InfeasibleParams: return "InfeasibleParams";
    case ErrorCode::TooLargeForExact: return "TooLargeForExact";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InconsistentState: return "InconsistentState";
    case ErrorCode::NonRegularGraph: return "NonRegularGraph";
    case ErrorCode::ProviderDegreeMismatch: return "ProviderDegreeMismatch";
    case ErrorCode::TraceTooShort: return "TraceTooShort";
    case ErrorCode::ScheduleExhausted: return "ScheduleExhausted";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BoundaryTooLarge: return "BoundaryTooLarge";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::PreconditionCutTooLarge: return "PreconditionCutTooLarge";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::NonzeroMean: return "NonzeroMean";
    case ErrorCode::CertificateViolated: return "CertificateViolated";
    case ErrorCode::InsufficientSizes: return "InsufficientSizes";
    case ErrorCode::TooFewTrials: return "TooFewTrials";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

}  // namespace voterlab
