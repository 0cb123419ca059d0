#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace voterlab {

enum class ErrorCode {
  DuplicateEdge,
  SelfLoop,
  NodeOutOfRange,
  Disconnected,
  InvalidParams,
  InfeasibleDegree,
  GenerationFailed,
  InfeasibleParams,
  TooLargeForExact,
  NoConvergence,
  InconsistentState,
  NonRegularGraph,
  ProviderDegreeMismatch,
  TraceTooShort,
  ScheduleExhausted,
  TooLarge,
  BoundaryTooLarge,
  PreconditionViolation,
  PreconditionCutTooLarge,
  SupportTooLarge,
  NonzeroMean,
  CertificateViolated,
  InsufficientSizes,
  TooFewTrials,
  ConfigInvalid,
  UnknownSuite,
  ParseError,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace voterlab
