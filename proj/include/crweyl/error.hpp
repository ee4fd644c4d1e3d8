#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace crweyl {

enum class ErrorCode {
  SyntaxError,
  VarOutOfRange,
  NotReal,
  EvalSingular,
  BackendUnsupported,
  OrderExceeded,
  OffSurface,
  FrameDegenerate,
  LeviDegenerate,
  FeffermanDegenerate,
  HessianDegenerate,
  NotPseudoEinstein,
  NotApproxMongeAmpere,
  NotPositiveFactor,
  NotPositiveJ,
  NotStrictlyPSH,
  NotUnitHessian,
  WrongDimension,
  FrameMismatch,
  KindMismatch,
  ComponentNotField,
  SymmetryViolation,
  RouteDisagreement,
  InternalInconsistency,
  NoConvergence,
  UnknownSurface,
  BadParameter,
  BadGridSpec,
  UsageError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message,
        std::optional<std::size_t> offset = std::nullopt)
      : std::runtime_error(message), code_(code), module_(std::move(module)), offset_(offset) {}

  ErrorCode code() const { return code_; }
  const std::string& module() const { return module_; }
  std::optional<std::size_t> offset() const { return offset_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::optional<std::size_t> offset_;
};

}  // namespace crweyl
