// SPDX-License-Identifier: Apache-2.0
//
// Cramer-Rao bounds, beamwidth and resolution.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "doafoundry/bounds.hpp"
#include "doafoundry/core.hpp"
#include "doafoundry/quantization.hpp"

namespace doafoundry {

/// Closed-form deterministic single-source ULA bound:
/// var = 6 / (L * snr * N (N^2 - 1) * pi^2 * cos^2 theta) rad^2.
CrlbReport crlb_ula_single(int elements, double snr_db, int snapshots, double theta_deg);

/// Observation model fed to the numeric Fisher information. An optional
/// analog combiner W (N x K, output y = W^H x) and optional per-output-channel
/// AQNM gains compose into every bound variant.
struct FimModel {
  std::optional<CMatrix> combiner;
  std::vector<double> channel_alpha;  // empty: unquantized

  static FimModel exact();
  static FimModel quantized(const AqnmModel& model, int channels);
  static FimModel hybrid(CMatrix combiner);

  BoundKind kind() const;
  CMatrix covariance(const CMatrix& r_elements) const;
};

/// Gaussian-observation Fisher information L tr(R^-1 R' R^-1 R') with R'
/// from central differences (step 1e-4 rad) and a Richardson-extrapolated
/// cross-check; the bound is its inverse. Single emitter only.
CrlbReport crlb_numeric_fim(const ArrayGeometry& geometry, const EmitterScenario& scenario,
                            const FimModel& model);

/// Same oracle for an arbitrary covariance family R(theta_rad).
double fisher_information_numeric(const std::function<CMatrix(double)>& model_rad,
                                  double theta_rad, int snapshots, double* richardson_rel = nullptr);

/// Half-power beamwidth at broadside, 0.886 * 2/N rad, in degrees.
double beamwidth_deg(int elements);

/// bw / snr^(1/4).
double resolution_predict(double bw_deg, double snr_db);

enum class ResolvingEstimator { Beamforming, Music };

struct ResolutionOptions {
  double grid_step_deg = 0.05;
  double tolerance_deg = 0.1;
  double max_separation_deg = 30.0;
};

/// Smallest separation (by bisection, to `tolerance_deg`) at which at least
/// half of the trials resolve two equal-power sources placed symmetrically
/// about broadside.
double empirical_resolution(ResolvingEstimator estimator, int elements, int snapshots,
                            double snr_db, int trials, std::uint64_t seed,
                            const ResolutionOptions& options = {});

/// Fraction of trials resolving the pair at a given separation.
double resolution_success_rate(ResolvingEstimator estimator, int elements, int snapshots,
                               double snr_db, double separation_deg, int trials,
                               std::uint64_t seed, double grid_step_deg);

}  // namespace doafoundry
