// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "doafoundry/core.hpp"
#include "doafoundry/detection.hpp"
#include "test_util.hpp"

using namespace doafoundry;
using testutil::code_of;

namespace {

CovarianceEstimate diag_cov(std::vector<double> d) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
  return CovarianceEstimate(m, 10);
}

// Independent noise-only sampler: separate engine, separate normal generator.
double oracle_quantile_eig_ratio(int n, int l, double pfa, int trials, unsigned seed) {
  std::mt19937 eng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<double> v;
  v.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXcd x(n, l);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < l; ++j) x(i, j) = {gauss(eng), gauss(eng)};
    const Eigen::MatrixXcd r = x * x.adjoint() / double(l);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(r, Eigen::EigenvaluesOnly).eigenvalues();
    v.push_back(ev(n - 1) / ev(0));
  }
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(std::floor((1.0 - pfa) * trials))];
}

}  // namespace

TEST_CASE("statistic definitions on a known spectrum") {
  const auto r = diag_cov({1.0, 4.0, 1.0, 2.0});
  CHECK(stat_eig_ratio(r) == doctest::Approx(4.0));
  CHECK(stat_eig_over_noise(r) == doctest::Approx(3.0));
  CHECK(stat_eig_mean(r) == doctest::Approx(2.5));
  CHECK(stat_glrt_energy(r) == doctest::Approx(2.0));
}

TEST_CASE("ratio statistics are scale invariant, the others scale linearly") {
  const auto r = diag_cov({0.7, 3.0, 1.1, 1.9, 0.4});
  for (double c : {0.01, 3.0, 250.0}) {
    const auto s = r.scaled(c);
    CHECK(stat_eig_ratio(s) == doctest::Approx(stat_eig_ratio(r)));
    CHECK(stat_eig_over_noise(s) == doctest::Approx(stat_eig_over_noise(r)));
    CHECK(stat_eig_mean(s) == doctest::Approx(c * stat_eig_mean(r)));
    CHECK(stat_glrt_energy(s) == doctest::Approx(c * stat_glrt_energy(r)));
  }
}

TEST_CASE("statistic error paths") {
  CHECK(code_of([] { (void)stat_eig_ratio(diag_cov({1.0, 0.0})); }) == ErrorCode::DegenerateCovariance);
  CHECK(code_of([] { (void)stat_eig_over_noise(diag_cov({1.0})); }) == ErrorCode::InsufficientDimensions);
  CHECK(code_of([] { (void)stat_eig_over_noise(diag_cov({1.0, 0.0})); }) == ErrorCode::DegenerateCovariance);
  CHECK(code_of([] { (void)statistic_from_string("bogus"); }) == ErrorCode::InvalidArgument);
  for (auto s : kAllStatistics) CHECK(statistic_from_string(to_string(s)) == s);
}

TEST_CASE("detect compares strictly against the threshold") {
  const auto r = diag_cov({1.0, 4.0});
  CHECK_FALSE(detect(DetectionStatistic::EigRatio, r, 4.0, 0.01).decision);
  CHECK(detect(DetectionStatistic::EigRatio, r, 3.999, 0.01).decision);
  CHECK(code_of([&] { (void)detect(DetectionStatistic::EigRatio, r, 1.0, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("calibration refuses too few trials") {
  CHECK(code_of([] { (void)calibrate_threshold(DetectionStatistic::EigRatio, 4, 10, 0.01, 999, 1); }) ==
        ErrorCode::CalibrationUnreliable);
  CHECK(code_of([] { (void)calibrate_threshold(DetectionStatistic::EigRatio, 4, 10, 1.5, 999, 1); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("eigenvalue-ratio threshold agrees with an independent Monte Carlo quantile") {
  const int n = 4, l = 50, trials = 20000;
  const double lib = calibrate_threshold(DetectionStatistic::EigRatio, n, l, 0.01, trials, 77);
  const double oracle = oracle_quantile_eig_ratio(n, l, 0.01, trials, 1234);
  CHECK(lib == doctest::Approx(oracle).epsilon(0.05));
}

TEST_CASE("energy threshold agrees with the scaled chi-square quantile") {
  // trace(R)/N under noise is chi2(2NL)/(2NL); Wilson-Hilferty for the 99% point.
  const int n = 4, l = 50;
  const double k = 2.0 * n * l;
  const double z = 2.3263478740408408;
  const double c = 2.0 / (9.0 * k);
  const double oracle = std::pow(1.0 - c + z * std::sqrt(c), 3.0);
  const double lib = calibrate_threshold(DetectionStatistic::GlrtEnergy, n, l, 0.01, 20000, 8);
  CHECK(lib == doctest::Approx(oracle).epsilon(0.01));
}

TEST_CASE("calibrated thresholds hold the false-alarm rate out of sample") {
  DetectionSetup setup;
  setup.elements = 4;
  setup.snapshots = 40;
  const std::vector<DetectionStatistic> stats(std::begin(kAllStatistics), std::end(kAllStatistics));
  const auto thr = calibrate_thresholds(stats, setup, 0.05, 10000, 21);
  const auto pfa = empirical_false_alarm(stats, thr, setup, 10000, 22);
  // Binomial SE at 0.05 over 1e4 trials is 0.0022; quantile error adds a little.
  for (double p : pfa) CHECK(std::abs(p - 0.05) < 0.01);
}

TEST_CASE("detection probability grows with SNR and saturates") {
  const auto curve = pd_curve(DetectionStatistic::EigOverNoise, 6, 60, 0.01, {-25.0, -15.0, -10.0, -5.0, 5.0}, 600, 9);
  REQUIRE(curve.points.size() == 5);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    CHECK(b.pd + 2.0 * std::hypot(a.pd_stderr, b.pd_stderr) >= a.pd);
  }
  CHECK(curve.points.front().pd < 0.1);
  CHECK(curve.points.back().pd == doctest::Approx(1.0));
}
