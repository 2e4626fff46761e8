// SPDX-License-Identifier: Apache-2.0
//
// Low-resolution ADCs: a simulated uniform quantizer, the additive
// quantization noise model (AQNM), mixed-resolution receivers, and the power
// and energy-efficiency bookkeeping built on top of the Fisher bound.
#pragma once

#include <vector>

#include "doafoundry/bounds.hpp"
#include "doafoundry/core.hpp"

namespace doafoundry {

/// Uniform mid-rise quantizer applied independently to each rail. The
/// clipping range is +-clip_sigma * rail_sigma, where rail_sigma is the
/// standard deviation of one rail of the input (fixed, not data-derived, so
/// quantization is idempotent).
struct QuantizerConfig {
  int bits = 1;
  double clip_sigma = 3.5;
  double rail_sigma = 1.0 / 1.4142135623730951;

  double step() const;
  void validate() const;
};

double quantize_rail(double value, const QuantizerConfig& cfg);
SnapshotMatrix quantize(const SnapshotMatrix& x, const QuantizerConfig& cfg);

/// Per-rail standard deviation of the synthesized observation for a scenario.
double rail_sigma_for(const EmitterScenario& scenario);

struct AqnmModel {
  int bits = 1;
  double rho = 0.0;    // normalized mean-squared quantization error
  double alpha = 1.0;  // 1 - rho
};

/// Distortion of the optimal (Lloyd-Max) quantizer with `levels` levels for a
/// unit-variance Gaussian, computed by Lloyd iteration with closed-form
/// Gaussian cell integrals.
double lloyd_max_distortion(int levels);

/// rho from Lloyd-Max for bits <= 5 (cached once, safe for concurrent use),
/// the high-resolution asymptote (pi*sqrt(3)/2) * 2^(-2 bits) above.
AqnmModel aqnm_model(int bits);

/// alpha^2 R + alpha (1 - alpha) diag(R).
CMatrix quantized_covariance_model(const CMatrix& r_exact, const AqnmModel& model);

/// Single-source ULA bound with the AQNM-distorted covariance.
CrlbReport crlb_quantized(int elements, double snr_db, int snapshots, double theta_deg, int bits);

/// 10 log10(quantized bound / unquantized bound).
double performance_loss_db(int elements, double snr_db, int snapshots, double theta_deg, int bits);

/// SNR at which the quantized bound equals `target_variance_deg2`, found by
/// bisection on [lo_db, hi_db]. Used for bits-versus-SNR trade-off curves.
double required_snr_db(int elements, int snapshots, double theta_deg, int bits,
                       double target_variance_deg2, double lo_db = -40.0, double hi_db = 60.0);

/// Receiver whose first `m0` RF chains carry high-resolution converters.
/// `subarray_size` (M_a) of 1 is a full-digital array; larger values make a
/// sub-connected hybrid array with antennas / subarray_size chains.
struct MixedAdcConfig {
  int antennas = 0;
  int subarray_size = 1;
  int m0 = 0;
  int low_bits = 1;
  int high_bits = 12;

  int chains() const;
  bool hybrid() const { return subarray_size > 1; }
  std::vector<int> channel_bits() const;
  void validate() const;
};

/// Per-channel gain vector g (1 on high-resolution channels, alpha elsewhere)
/// applied as G R G plus diagonal quantization noise alpha(1-alpha) R_ii.
CMatrix mixed_covariance_model(const CMatrix& r_channels, const MixedAdcConfig& cfg);

/// Bound for the mixed configuration; hybrid configurations steer every
/// subarray's analog beam to the true angle.
CrlbReport crlb_mixed(const MixedAdcConfig& cfg, double snr_db, int snapshots, double theta_deg);

/// Component powers in watts. ADC power per rail is p_adc_ref * 2^bits.
struct PowerModel {
  double p_rf_chain = 59.8e-3;       // mixer, LO, two filters, two baseband amplifiers
  double p_adc_ref = 494e-15 * 1e9;  // figure of merit times sampling rate
  double p_phase_shifter = 19.5e-3;
  double p_lna = 39e-3;
  double p_baseband = 200e-3;

  void validate() const;
};

double power_total(const MixedAdcConfig& cfg, const PowerModel& pm);

/// CRLB^(-1/2) / P_total in 1/degree/W.
double energy_efficiency(const CrlbReport& crlb, double p_total_w);

}  // namespace doafoundry
