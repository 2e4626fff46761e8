// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/detection.hpp"

#include <algorithm>
#include <cmath>

#include "doafoundry/error.hpp"
#include "doafoundry/random.hpp"

namespace doafoundry {

namespace {

constexpr std::uint64_t kCalibrationStream = 0x4341'4c49ULL;
constexpr std::uint64_t kCurveStream = 0x4355'5256ULL;

CovarianceEstimate trial_covariance(const DetectionSetup& setup, bool signal_present,
                                    double snr_db, std::uint64_t seed) {
  EmitterScenario sc;
  if (signal_present) {
    sc = EmitterScenario::single(setup.source_angle_deg, snr_db, setup.snapshots, seed);
  } else {
    sc.snapshots = setup.snapshots;
    sc.seed = seed;
  }
  sc.signal_model = setup.signal_model;
  return sample_covariance(synthesize_snapshots(sc, ArrayGeometry::ula(setup.elements)));
}

double empirical_quantile_threshold(std::vector<double> values, double pfa) {
  std::sort(values.begin(), values.end());
  const double pos = std::ceil((1.0 - pfa) * static_cast<double>(values.size())) - 1.0;
  const auto idx = static_cast<std::size_t>(std::clamp(pos, 0.0, double(values.size() - 1)));
  return values[idx];
}

void check_pfa(double pfa) {
  if (!(pfa > 0.0 && pfa <= 1.0)) throw Error(ErrorCode::InvalidArgument, "pfa must lie in (0, 1]");
}

}  // namespace

const char* to_string(DetectionStatistic s) noexcept {
  switch (s) {
    case DetectionStatistic::EigRatio: return "eig_ratio";
    case DetectionStatistic::EigOverNoise: return "eig_over_noise";
    case DetectionStatistic::EigMean: return "eig_mean";
    case DetectionStatistic::GlrtEnergy: return "glrt_energy";
  }
  return "unknown";
}

DetectionStatistic statistic_from_string(const std::string& name) {
  for (auto s : kAllStatistics) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown detection statistic '" + name + "'");
}

double stat_eig_ratio(const CovarianceEstimate& r) {
  const auto& ev = r.eigenvalues();
  const double smallest = ev(ev.size() - 1);
  if (!(smallest > 0.0)) {
    throw Error(ErrorCode::DegenerateCovariance, "smallest eigenvalue is not positive");
  }
  return ev(0) / smallest;
}

double stat_eig_over_noise(const CovarianceEstimate& r) {
  const auto& ev = r.eigenvalues();
  if (ev.size() < 2) {
    throw Error(ErrorCode::InsufficientDimensions, "noise estimate needs N >= 2");
  }
  const double noise = ev.tail(ev.size() - 1).mean();
  if (!(noise > 0.0)) {
    throw Error(ErrorCode::DegenerateCovariance, "estimated noise variance is not positive");
  }
  return ev(0) / noise;
}

double stat_eig_mean(const CovarianceEstimate& r) {
  const auto& ev = r.eigenvalues();
  return 0.5 * (ev(0) + ev(ev.size() - 1));
}

double stat_glrt_energy(const CovarianceEstimate& r) {
  return r.matrix().trace().real() / r.size();
}

double evaluate_statistic(DetectionStatistic s, const CovarianceEstimate& r) {
  switch (s) {
    case DetectionStatistic::EigRatio: return stat_eig_ratio(r);
    case DetectionStatistic::EigOverNoise: return stat_eig_over_noise(r);
    case DetectionStatistic::EigMean: return stat_eig_mean(r);
    case DetectionStatistic::GlrtEnergy: return stat_glrt_energy(r);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown statistic");
}

DetectionResult detect(DetectionStatistic s, const CovarianceEstimate& r, double threshold,
                       double pfa_target) {
  check_pfa(pfa_target);
  DetectionResult out{s, evaluate_statistic(s, r), threshold, false, pfa_target};
  out.decision = out.value > threshold;
  return out;
}

std::vector<double> calibrate_thresholds(const std::vector<DetectionStatistic>& stats,
                                         const DetectionSetup& setup, double pfa, int trials,
                                         std::uint64_t seed) {
  check_pfa(pfa);
  if (trials < 1 || static_cast<double>(trials) < 10.0 / pfa) {
    throw Error(ErrorCode::CalibrationUnreliable,
                "need at least 10/pfa trials, got " + std::to_string(trials));
  }
  std::vector<std::vector<double>> values(stats.size(), std::vector<double>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const auto r = trial_covariance(setup, false, 0.0, derive_seed(seed, kCalibrationStream, t));
    for (std::size_t i = 0; i < stats.size(); ++i) values[i][t] = evaluate_statistic(stats[i], r);
  });
  std::vector<double> thresholds;
  thresholds.reserve(stats.size());
  for (auto& v : values) thresholds.push_back(empirical_quantile_threshold(std::move(v), pfa));
  return thresholds;
}

double calibrate_threshold(DetectionStatistic s, int elements, int snapshots, double pfa,
                           int trials, std::uint64_t seed) {
  DetectionSetup setup;
  setup.elements = elements;
  setup.snapshots = snapshots;
  return calibrate_thresholds({s}, setup, pfa, trials, seed).front();
}

std::vector<double> empirical_false_alarm(const std::vector<DetectionStatistic>& stats,
                                          const std::vector<double>& thresholds,
                                          const DetectionSetup& setup, int trials,
                                          std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
  std::vector<std::vector<char>> hit(stats.size(), std::vector<char>(trials, 0));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const auto r = trial_covariance(setup, false, 0.0, derive_seed(seed, kCalibrationStream, t));
    for (std::size_t i = 0; i < stats.size(); ++i) {
      hit[i][t] = evaluate_statistic(stats[i], r) > thresholds[i];
    }
  });
  std::vector<double> rates;
  for (const auto& h : hit) {
    rates.push_back(static_cast<double>(std::count(h.begin(), h.end(), 1)) / trials);
  }
  return rates;
}

std::vector<PdCurve> pd_curves(const std::vector<DetectionStatistic>& stats,
                               const std::vector<double>& thresholds, const DetectionSetup& setup,
                               double pfa, const std::vector<double>& snr_grid_db, int trials,
                               std::uint64_t seed) {
  check_pfa(pfa);
  if (thresholds.size() != stats.size()) {
    throw Error(ErrorCode::InvalidArgument, "one threshold per statistic is required");
  }
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");

  std::vector<PdCurve> curves;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    curves.push_back(PdCurve{stats[i], pfa, thresholds[i], {}});
  }
  for (double snr : snr_grid_db) {
    std::vector<std::vector<char>> hit(stats.size(), std::vector<char>(trials, 0));
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
      const auto r = trial_covariance(setup, true, snr, derive_seed(seed, kCurveStream, t));
      for (std::size_t i = 0; i < stats.size(); ++i) {
        hit[i][t] = evaluate_statistic(stats[i], r) > thresholds[i];
      }
    });
    for (std::size_t i = 0; i < stats.size(); ++i) {
      const double pd =
          static_cast<double>(std::count(hit[i].begin(), hit[i].end(), 1)) / trials;
      curves[i].points.push_back(PdPoint{snr, pd, std::sqrt(pd * (1.0 - pd) / trials)});
    }
  }
  return curves;
}

PdCurve pd_curve(DetectionStatistic s, int elements, int snapshots, double pfa,
                 const std::vector<double>& snr_grid_db, int trials, std::uint64_t seed) {
  DetectionSetup setup;
  setup.elements = elements;
  setup.snapshots = snapshots;
  const int cal_trials = std::max(trials, static_cast<int>(std::ceil(10.0 / pfa)));
  const auto thresholds = calibrate_thresholds({s}, setup, pfa, cal_trials, splitmix64(seed));
  return pd_curves({s}, thresholds, setup, pfa, snr_grid_db, trials, seed).front();
}

}  // namespace doafoundry
