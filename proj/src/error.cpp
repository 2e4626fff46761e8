// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/error.hpp"

namespace doafoundry {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::UnsupportedGeometry: return "unsupported-geometry";
    case ErrorCode::InvalidGeometry: return "invalid-geometry";
    case ErrorCode::DegenerateCovariance: return "degenerate-covariance";
    case ErrorCode::InsufficientDimensions: return "insufficient-dimensions";
    case ErrorCode::CalibrationUnreliable: return "calibration-unreliable";
    case ErrorCode::InvalidModelOrder: return "invalid-model-order";
    case ErrorCode::InvalidRoot: return "invalid-root";
    case ErrorCode::EstimationFailed: return "estimation-failed";
    case ErrorCode::Degenerate: return "degenerate";
    case ErrorCode::Numerical: return "numerical";
    case ErrorCode::Configuration: return "configuration";
    case ErrorCode::AmbiguityResolutionFailed: return "ambiguity-resolution-failed";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::Unidentifiable: return "unidentifiable";
    case ErrorCode::SolverFailed: return "solver-failed";
    case ErrorCode::InsufficientCoarray: return "insufficient-coarray";
    case ErrorCode::OverCapacity: return "over-capacity";
    case ErrorCode::DegeneratePlane: return "degenerate-plane";
    case ErrorCode::NoTriangle: return "no-triangle";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace doafoundry
