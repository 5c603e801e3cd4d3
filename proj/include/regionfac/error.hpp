#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace regionfac {

enum class ErrorCode {
  EmptyMatrix,
  ConvergenceFailure,
  NotPositiveDefinite,
  SingularTriangular,
  InvalidRegularizer,
  DimensionMismatch,
  NonFiniteValue,
  InvalidArgument,
  UnknownGeneratorKind,
  DegenerateMask,
  InvalidBox,
  ZeroBackgroundJacobian,
  NumericalInconsistency,
  ZeroVector,
  IoError,
  NotAJacobianFile,
  NotAMaskFile,
  NotADirectionsFile,
  UnsupportedVersion,
  InvalidHeader,
  TruncatedFile,
  InvalidPayload,
  InvalidMaskValue,
  InvalidDirections,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the toolkit. The code identifies the failure
/// class; `index` and `value` carry the failing pivot / achieved residual
/// where the failure has one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt,
        std::optional<double> value = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }
  std::optional<double> value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
  std::optional<double> value_;
};

}  // namespace regionfac
