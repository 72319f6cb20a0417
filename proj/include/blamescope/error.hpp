#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blamescope {

enum class ErrorCode {
  // model errors
  CyclicGraph,
  DanglingParent,
  DuplicateId,
  InvalidDomain,
  NonNormalizedDistribution,
  PartialMechanism,
  UnknownVariable,
  ValueOutOfDomain,
  IncompleteExogenousAssignment,
  StateSpaceTooLarge,
  ZeroProbabilityObservation,
  // data errors
  FileNotFound,
  ParseError,
  SchemaViolation,
  DuplicateCaseId,
  EmptyCaseList,
  EmptyTraceList,
  TraceCaseMismatch,
  DegenerateMarginals,
  // configuration errors
  InvalidArgument,
  UnknownOutcome,
  UnknownAction,
  UnknownCost,
  ConfigError,
};

enum class ErrorCategory { Config, Data, Model };

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::DanglingParent: return "DanglingParent";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::NonNormalizedDistribution: return "NonNormalizedDistribution";
    case ErrorCode::PartialMechanism: return "PartialMechanism";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::ValueOutOfDomain: return "ValueOutOfDomain";
    case ErrorCode::IncompleteExogenousAssignment: return "IncompleteExogenousAssignment";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::ZeroProbabilityObservation: return "ZeroProbabilityObservation";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateCaseId: return "DuplicateCaseId";
    case ErrorCode::EmptyCaseList: return "EmptyCaseList";
    case ErrorCode::EmptyTraceList: return "EmptyTraceList";
    case ErrorCode::TraceCaseMismatch: return "TraceCaseMismatch";
    case ErrorCode::DegenerateMarginals: return "DegenerateMarginals";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownOutcome: return "UnknownOutcome";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::UnknownCost: return "UnknownCost";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

inline ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound:
    case ErrorCode::ParseError:
    case ErrorCode::SchemaViolation:
    case ErrorCode::DuplicateCaseId:
    case ErrorCode::EmptyCaseList:
    case ErrorCode::EmptyTraceList:
    case ErrorCode::TraceCaseMismatch:
    case ErrorCode::DegenerateMarginals:
      return ErrorCategory::Data;
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownOutcome:
    case ErrorCode::UnknownAction:
    case ErrorCode::UnknownCost:
    case ErrorCode::ConfigError:
      return ErrorCategory::Config;
    default:
      return ErrorCategory::Model;
  }
}

/// Process exit code for an error category: 2 config, 3 data, 4 model.
inline int exit_code(ErrorCategory cat) {
  switch (cat) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Model: return 4;
  }
  return 1;
}

/// Every failure raised by the library. `subject()` names the offending
/// variable, case, column or file when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string subject, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) +
                           (subject.empty() ? "" : " [" + subject + "]") +
                           (detail.empty() ? "" : ": " + detail)),
        code_(code),
        subject_(std::move(subject)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace blamescope
