#include "stockflow/error.hpp"

#include <utility>

namespace sfd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDiagram: return "InvalidDiagram";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::Syntax: return "Syntax";
    case ErrorKind::MissingVariable: return "MissingVariable";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::MissingRename: return "MissingRename";
    case ErrorKind::EmptySum: return "EmptySum";
    case ErrorKind::MissingFlowFn: return "MissingFlowFn";
    case ErrorKind::ForeignLink: return "ForeignLink";
    case ErrorKind::TimeInFlowFn: return "TimeInFlowFn";
    case ErrorKind::NotNatural: return "NotNatural";
    case ErrorKind::NotPrimitive: return "NotPrimitive";
    case ErrorKind::InconsistentFlowFns: return "InconsistentFlowFns";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::UnknownStock: return "UnknownStock";
    case ErrorKind::UnknownFlow: return "UnknownFlow";
    case ErrorKind::SumMismatch: return "SumMismatch";
    case ErrorKind::DuplicateFlowId: return "DuplicateFlowId";
    case ErrorKind::IncompleteAttachment: return "IncompleteAttachment";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::NotHalfOutflow: return "NotHalfOutflow";
    case ErrorKind::MissingExogenous: return "MissingExogenous";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Format: return "Format";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

Error Error::at_step(std::size_t index) const {
  Error copy(kind_, "step " + std::to_string(index) + ": " + what());
  copy.step_ = index;
  return copy;
}

Error Error::with_context(std::string_view context) const {
  Error copy(kind_, std::string(context) + ": " + what());
  copy.step_ = step_;
  return copy;
}

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected,
                         const std::string& message)
    : Error(ErrorKind::Syntax, message), offset_(offset), expected_(std::move(expected)) {}

SumMismatchError::SumMismatchError(double max_deviation, const std::string& message)
    : Error(ErrorKind::SumMismatch, message), max_deviation_(max_deviation) {}

}  // namespace sfd
