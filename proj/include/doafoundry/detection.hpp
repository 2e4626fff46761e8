// SPDX-License-Identifier: Apache-2.0
//
// Passive-emitter detection from the eigenvalues of the sample covariance.
// Thresholds are always calibrated by Monte Carlo over noise-only trials.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "doafoundry/core.hpp"

namespace doafoundry {

enum class DetectionStatistic { EigRatio, EigOverNoise, EigMean, GlrtEnergy };

inline constexpr DetectionStatistic kAllStatistics[] = {
    DetectionStatistic::EigRatio, DetectionStatistic::EigOverNoise,
    DetectionStatistic::EigMean, DetectionStatistic::GlrtEnergy};

const char* to_string(DetectionStatistic s) noexcept;
DetectionStatistic statistic_from_string(const std::string& name);

struct DetectionResult {
  DetectionStatistic statistic_name;
  double value = 0.0;
  double threshold = 0.0;
  bool decision = false;
  double pfa_target = 0.0;
};

/// lambda_1 / lambda_N.
double stat_eig_ratio(const CovarianceEstimate& r);
/// lambda_1 over the mean of the N-1 smallest eigenvalues.
double stat_eig_over_noise(const CovarianceEstimate& r);
/// (lambda_1 + lambda_N) / 2.
double stat_eig_mean(const CovarianceEstimate& r);
/// trace(R)/N: energy detector with the noise power known to be one.
double stat_glrt_energy(const CovarianceEstimate& r);

double evaluate_statistic(DetectionStatistic s, const CovarianceEstimate& r);

DetectionResult detect(DetectionStatistic s, const CovarianceEstimate& r, double threshold,
                       double pfa_target);

/// Shared setup of the H0/H1 trials: a single emitter at `source_angle_deg`
/// under H1.
struct DetectionSetup {
  int elements = 8;
  int snapshots = 100;
  double source_angle_deg = 10.0;
  SignalModel signal_model = SignalModel::GaussianIID;
};

/// Empirical (1 - pfa) quantile of the statistic over noise-only trials.
/// Requires trials >= 10 / pfa.
double calibrate_threshold(DetectionStatistic s, int elements, int snapshots, double pfa,
                           int trials, std::uint64_t seed);

/// Calibrates every statistic from the same noise-only trials.
std::vector<double> calibrate_thresholds(const std::vector<DetectionStatistic>& stats,
                                         const DetectionSetup& setup, double pfa, int trials,
                                         std::uint64_t seed);

/// Fraction of noise-only trials whose statistic exceeds the threshold.
std::vector<double> empirical_false_alarm(const std::vector<DetectionStatistic>& stats,
                                          const std::vector<double>& thresholds,
                                          const DetectionSetup& setup, int trials,
                                          std::uint64_t seed);

struct PdPoint {
  double snr_db = 0.0;
  double pd = 0.0;
  double pd_stderr = 0.0;
};

struct PdCurve {
  DetectionStatistic statistic;
  double pfa_target = 0.0;
  double threshold = 0.0;
  std::vector<PdPoint> points;
};

/// Detection probability per SNR at a calibrated threshold. All SNR points
/// reuse the same per-trial seeds, so the curves are directly comparable.
std::vector<PdCurve> pd_curves(const std::vector<DetectionStatistic>& stats,
                               const std::vector<double>& thresholds, const DetectionSetup& setup,
                               double pfa, const std::vector<double>& snr_grid_db, int trials,
                               std::uint64_t seed);

/// Convenience form: calibrates with max(trials, 10/pfa) noise-only trials
/// drawn from an independent seed stream, then sweeps SNR.
PdCurve pd_curve(DetectionStatistic s, int elements, int snapshots, double pfa,
                 const std::vector<double>& snr_grid_db, int trials, std::uint64_t seed);

}  // namespace doafoundry
