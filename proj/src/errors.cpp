#include "apwdg/common.hpp"

namespace apwdg {

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigParse:
      return ErrorCategory::ConfigParse;
    case ErrorCode::OverlappingSpheres:
    case ErrorCode::SphereOutsideCell:
    case ErrorCode::InvalidIndex:
    case ErrorCode::OutOfRange:
    case ErrorCode::InvalidArgument:
    case ErrorCode::GridTooCoarse:
    case ErrorCode::SymmetryMismatch:
      return ErrorCategory::Validation;
    case ErrorCode::Io:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Numerical;
  }
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::OverlappingSpheres: return "OverlappingSpheres";
    case ErrorCode::SphereOutsideCell: return "SphereOutsideCell";
    case ErrorCode::InvalidIndex: return "InvalidIndex";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::AtSingularity: return "AtSingularity";
    case ErrorCode::QuadratureUnderResolved: return "QuadratureUnderResolved";
    case ErrorCode::MassNotPositiveDefinite: return "MassNotPositiveDefinite";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::IndexMismatch: return "IndexMismatch";
    case ErrorCode::SymmetryMismatch: return "SymmetryMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace apwdg
