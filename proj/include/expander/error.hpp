#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace expander {

enum class ErrorCode {
  AlphaOutOfRange,
  NonpositivePhi,
  BadOrder,
  DegenerateGrid,
  NonConvexInput,
  OutsideBall,
  SingularHessian,
  IncompleteStencil,
  NonEllipticPoint,
  NonnegativePotential,
  BadConstant,
  NoAdmissibleRho,
  DominanceFailed,
  NewtonDiverged,
  ConvexityLost,
  LinearSolveFailed,
  DampingExhausted,
  InsufficientData,
  BracketFailed,
  NonElliptic,
  ParseError,
  ValidationError,
  IoError,
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

}  // namespace expander
