// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace doafoundry {

enum class ErrorCode {
  InvalidArgument,
  UnsupportedGeometry,
  InvalidGeometry,
  DegenerateCovariance,
  InsufficientDimensions,
  CalibrationUnreliable,
  InvalidModelOrder,
  InvalidRoot,
  EstimationFailed,
  Degenerate,
  Numerical,
  Configuration,
  AmbiguityResolutionFailed,
  Precondition,
  Unidentifiable,
  SolverFailed,
  InsufficientCoarray,
  OverCapacity,
  DegeneratePlane,
  NoTriangle,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library. The code identifies the contract
/// that was violated; the message names the offending value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace doafoundry
