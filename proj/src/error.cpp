#include "regionfac/error.hpp"

namespace regionfac {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SingularTriangular: return "SingularTriangular";
    case ErrorCode::InvalidRegularizer: return "InvalidRegularizer";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownGeneratorKind: return "UnknownGeneratorKind";
    case ErrorCode::DegenerateMask: return "DegenerateMask";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::ZeroBackgroundJacobian: return "ZeroBackgroundJacobian";
    case ErrorCode::NumericalInconsistency: return "NumericalInconsistency";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NotAJacobianFile: return "NotAJacobianFile";
    case ErrorCode::NotAMaskFile: return "NotAMaskFile";
    case ErrorCode::NotADirectionsFile: return "NotADirectionsFile";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::InvalidHeader: return "InvalidHeader";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::InvalidPayload: return "InvalidPayload";
    case ErrorCode::InvalidMaskValue: return "InvalidMaskValue";
    case ErrorCode::InvalidDirections: return "InvalidDirections";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index,
             std::optional<double> value)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code),
      index_(index),
      value_(value) {}

}  // namespace regionfac
