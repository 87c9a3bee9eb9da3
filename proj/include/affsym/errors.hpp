#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace affsym {

enum class ErrorCode {
  PointOutsideChart,
  OrderUnsupported,
  DegenerateSurface,
  IndefiniteMetric,
  TangentDecompositionFailure,
  AmbiguousAxis,
  FrameNotDifferentiable,
  UnknownSurface,
  ParamsOutOfRange,
  KindMismatch,
  InadmissibleCurve,
  BlowUp,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PointOutsideChart: return "PointOutsideChart";
    case ErrorCode::OrderUnsupported: return "OrderUnsupported";
    case ErrorCode::DegenerateSurface: return "DegenerateSurface";
    case ErrorCode::IndefiniteMetric: return "IndefiniteMetric";
    case ErrorCode::TangentDecompositionFailure: return "TangentDecompositionFailure";
    case ErrorCode::AmbiguousAxis: return "AmbiguousAxis";
    case ErrorCode::FrameNotDifferentiable: return "FrameNotDifferentiable";
    case ErrorCode::UnknownSurface: return "UnknownSurface";
    case ErrorCode::ParamsOutOfRange: return "ParamsOutOfRange";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InadmissibleCurve: return "InadmissibleCurve";
    case ErrorCode::BlowUp: return "BlowUp";
  }
  return "Unknown";
}

// Numerical failures (degenerate geometry, blow-up) as opposed to bad input.
inline bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateSurface:
    case ErrorCode::IndefiniteMetric:
    case ErrorCode::TangentDecompositionFailure:
    case ErrorCode::AmbiguousAxis:
    case ErrorCode::FrameNotDifferentiable:
    case ErrorCode::BlowUp:
      return true;
    default:
      return false;
  }
}

class GeometryError : public std::runtime_error {
 public:
  GeometryError(ErrorCode code, const std::string& what, std::optional<double> where = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), where_(where) {}

  ErrorCode code() const { return code_; }
  // Offending parameter value (curve t, flow time) when there is one.
  std::optional<double> where() const { return where_; }

 private:
  ErrorCode code_;
  std::optional<double> where_;
};

}  // namespace affsym
