// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "doafoundry/core.hpp"
#include "doafoundry/estimators.hpp"
#include "test_util.hpp"

using namespace doafoundry;
using testutil::code_of;

namespace {

CovarianceEstimate exact_cov(const std::vector<double>& angles, double snr_db, int n) {
  const auto g = ArrayGeometry::ula(n);
  return CovarianceEstimate(model_covariance(EmitterScenario::equal_power(angles, snr_db, 1, 0), g), 1000, g);
}

CovarianceEstimate noiseless_cov(const std::vector<double>& angles, int n, std::uint64_t seed) {
  const auto g = ArrayGeometry::ula(n);
  auto s = EmitterScenario::equal_power(angles, 0.0, 4 * n, seed);
  s.noise_enabled = false;
  return sample_covariance(synthesize_snapshots(s, g));
}

double max_error(const std::vector<double>& got, std::vector<double> truth) {
  std::sort(truth.begin(), truth.end());
  REQUIRE(got.size() == truth.size());
  double e = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) e = std::max(e, std::abs(got[i] - truth[i]));
  return e;
}

}  // namespace

TEST_CASE("grid construction") {
  const auto g = make_grid();
  CHECK(g.size() == 1801);
  CHECK(g.front() == -90.0);
  CHECK(g.back() == doctest::Approx(90.0));
  CHECK(make_grid(-1.0, 1.0, 0.5).size() == 5);
  CHECK(code_of([] { (void)make_grid(0.0, 1.0, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("beamforming and Capon peak at a single source") {
  const auto r = exact_cov({23.0}, 10.0, 12);
  const auto grid = make_grid(-90.0, 90.0, 0.1);
  for (const auto& spec : {beamform_spectrum(r, grid), capon_spectrum(r, grid, 0.0)}) {
    const auto p = pick_peaks(spec, 1);
    REQUIRE(p.peaks.size() == 1);
    CHECK(p.peaks[0].angle_deg == doctest::Approx(23.0).epsilon(0.002));
  }
}

TEST_CASE("monopulse zero crossing sits at the source") {
  const auto r = exact_cov({-12.0}, 20.0, 10);
  const auto rep = monopulse_estimate(r, make_grid(-80.0, 80.0, 0.1), 4.0);
  CHECK(rep.angles_deg[0] == doctest::Approx(-12.0).epsilon(1e-3));
  CHECK(code_of([&] { (void)monopulse_difference(r, make_grid(), 4.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("subspace estimators are exact without noise") {
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> ang(-60.0, 60.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 6 + rep % 10;
    std::vector<double> truth{ang(eng), ang(eng)};
    if (std::abs(truth[0] - truth[1]) < 8.0) truth[1] = truth[0] > 0 ? truth[0] - 20.0 : truth[0] + 20.0;
    const auto r = noiseless_cov(truth, n, 100 + rep);
    CHECK(max_error(root_music(r, 2).angles_deg, truth) < 1e-6);
    CHECK(max_error(esprit(r, 2).angles_deg, truth) < 1e-6);
    CHECK(max_error(music_estimate(r, 2, make_grid()).angles_deg, truth) < 1e-4);
  }
}

TEST_CASE("model order and geometry preconditions") {
  const auto r = exact_cov({0.0}, 0.0, 4);
  CHECK(code_of([&] { (void)root_music(r, 4); }) == ErrorCode::InvalidModelOrder);
  CHECK(code_of([&] { (void)esprit(r, 0); }) == ErrorCode::InvalidModelOrder);
  CHECK(code_of([&] { (void)music_spectrum(r, 5, make_grid()); }) == ErrorCode::InvalidModelOrder);
  CHECK(code_of([&] { (void)music_spectrum(r, 1, {}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { (void)music_spectrum(r, 1, {1.0, 0.0}); }) == ErrorCode::InvalidArgument);

  const auto g = ArrayGeometry::coprime(2, 3, {0, 2, 3, 4, 6, 8, 10});
  const CovarianceEstimate rc(model_covariance(EmitterScenario::single(5.0, 0.0, 1, 0), g), 10, g);
  CHECK(code_of([&] { (void)root_music(rc, 1); }) == ErrorCode::UnsupportedGeometry);
  CHECK(code_of([&] { (void)esprit(rc, 1); }) == ErrorCode::UnsupportedGeometry);
}

TEST_CASE("root-MUSIC polynomial roots come in conjugate-reciprocal pairs") {
  const auto r = exact_cov({15.0}, 10.0, 6);
  const CMatrix en = r.noise_subspace(1);
  const auto roots = root_music_polynomial_roots(en * en.adjoint());
  CHECK(roots.size() == 10);
  for (const auto& z : roots) {
    const auto mirror = 1.0 / std::conj(z);
    double best = 1e9;
    for (const auto& w : roots) best = std::min(best, std::abs(w - mirror));
    CHECK(best < 1e-6);
  }
  const auto cand = root_music_candidates(roots);
  CHECK(cand.size() == 5);
  for (const auto& z : cand) CHECK(std::abs(z) <= 1.0 + 1e-9);
}

TEST_CASE("peak picking") {
  SpectrumCurve s{{0, 1, 2, 3, 4, 5, 6}, {1, 3, 1, 2, 5, 2, 1}, "t"};
  auto p = pick_peaks(s, 2);
  REQUIRE(p.peaks.size() == 2);
  CHECK(p.peaks[0].angle_deg == doctest::Approx(1.0));
  CHECK(p.peaks[1].angle_deg == doctest::Approx(4.0));
  CHECK_FALSE(p.shortfall);
  CHECK(pick_peaks(s, 3).shortfall);

  SpectrumCurve mono{{0, 1, 2}, {3, 2, 1}, "t"};
  const auto b = pick_peaks(mono, 1);
  CHECK(b.peaks[0].boundary);
  CHECK(b.interior_count() == 0);
  CHECK(code_of([&] { (void)pick_peaks(s, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("pair resolution on exact covariances") {
  const auto grid = make_grid(-90.0, 90.0, 0.05);
  const auto r = exact_cov({0.0, 5.0}, 10.0, 16);
  CHECK_FALSE(resolves_pair(beamform_spectrum(r, grid), 0.0, 5.0));
  CHECK(resolves_pair(music_spectrum(r, 2, grid), 0.0, 5.0));
  const auto wide = exact_cov({0.0, 20.0}, 10.0, 16);
  CHECK(resolves_pair(beamform_spectrum(wide, grid), 0.0, 20.0));
}
