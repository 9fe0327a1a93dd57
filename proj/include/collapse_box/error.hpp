#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbox {

enum class ErrorCode {
  // behaviors
  EmptyAlphabet,
  NegativeWeight,
  NotNormalized,
  AlphabetMismatch,
  InvalidBehavior,
  ScenarioTooLarge,
  WrongScenarioShape,
  // collapse
  InvalidSpec,
  BoundaryViolation,
  EmptyGrid,
  TimeBeforeTrigger,
  TimeOutsideWindow,
  PriorMismatch,
  // scenarios
  NegativeElapsed,
  InvalidWindow,
  FormulaInconsistency,
  // quadrature
  MaxDepthExceeded,
  QuadratureFailure,
  // mc / signaling
  InvalidConfig,
  NonConvergence,
  // io
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cbox
