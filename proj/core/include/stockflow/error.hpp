#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sfd {

enum class ErrorKind {
  InvalidDiagram,
  DuplicateId,
  Syntax,
  MissingVariable,
  DivisionByZero,
  MissingRename,
  EmptySum,
  MissingFlowFn,
  ForeignLink,
  TimeInFlowFn,
  NotNatural,
  NotPrimitive,
  InconsistentFlowFns,
  TooLarge,
  UnknownStock,
  UnknownFlow,
  SumMismatch,
  DuplicateFlowId,
  IncompleteAttachment,
  NotClosed,
  NotHalfOutflow,
  MissingExogenous,
  InvalidConfig,
  Io,
  Format,
};

std::string_view to_string(ErrorKind kind);

/// Every library failure is reported as an Error carrying a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

  /// Index of the pipeline/script step that failed, when known.
  std::optional<std::size_t> step() const noexcept { return step_; }

  /// Copy of this error with a step index and a message prefix attached.
  Error at_step(std::size_t index) const;

  /// Copy of this error with extra context prepended to the message.
  Error with_context(std::string_view context) const;

 private:
  ErrorKind kind_;
  std::optional<std::size_t> step_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& message);

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// SumMismatch with the largest absolute deviation seen over the sample points.
class SumMismatchError : public Error {
 public:
  SumMismatchError(double max_deviation, const std::string& message);

  double max_deviation() const noexcept { return max_deviation_; }

 private:
  double max_deviation_;
};

}  // namespace sfd
