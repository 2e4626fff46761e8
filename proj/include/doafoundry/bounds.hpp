// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

namespace doafoundry {

enum class BoundKind { FullDigitalUla, NumericFim, Hybrid, Quantized };

const char* to_string(BoundKind kind) noexcept;

struct CrlbReport {
  double variance_deg2 = 0.0;
  BoundKind bound_kind = BoundKind::NumericFim;
  bool divergent = false;
  std::map<std::string, double> parameters;

  double rmse_deg() const;
};

}  // namespace doafoundry
