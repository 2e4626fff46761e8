// SPDX-License-Identifier: Apache-2.0
//
// Full-digital DOA estimators. Spectra take the array geometry from the
// covariance estimate; root-MUSIC and ESPRIT need a uniform layout.
#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "doafoundry/core.hpp"

namespace doafoundry {

inline constexpr double kDefaultGridStep = 0.1;

struct SpectrumCurve {
  std::vector<double> grid_deg;
  std::vector<double> values;
  std::string method;
};

struct EstimateReport {
  std::string method;
  std::vector<double> angles_deg;  // ascending
  std::optional<SpectrumCurve> spectrum;
  int time_blocks = 1;
  double flops = 0.0;
  std::vector<std::complex<double>> roots;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> flags;
};

/// Inclusive grid lo, lo+step, ..., hi.
std::vector<double> make_grid(double lo_deg = -90.0, double hi_deg = 90.0,
                              double step_deg = kDefaultGridStep);

/// P(theta) = a^H R a / N^2.
SpectrumCurve beamform_spectrum(const CovarianceEstimate& r, const std::vector<double>& grid);

/// P(theta) = 1 / (a^H (R + loading I)^{-1} a), evaluated through the cached
/// eigen-decomposition.
SpectrumCurve capon_spectrum(const CovarianceEstimate& r, const std::vector<double>& grid,
                             double diagonal_loading);

/// D(theta) = P_bf(theta + delta/2) - P_bf(theta - delta/2).
SpectrumCurve monopulse_difference(const CovarianceEstimate& r, const std::vector<double>& grid,
                                   double delta_deg);
/// Negative-slope zero crossing of the difference curve nearest to the
/// beamforming peak, located by linear interpolation.
EstimateReport monopulse_estimate(const CovarianceEstimate& r, const std::vector<double>& grid,
                                  double delta_deg);

SpectrumCurve music_spectrum(const CovarianceEstimate& r, int n_sources,
                             const std::vector<double>& grid);
/// MUSIC peaks followed by a local minimization of the null spectrum
/// |E_n^H a(theta)|^2 within one grid step of each peak.
EstimateReport music_estimate(const CovarianceEstimate& r, int n_sources,
                              const std::vector<double>& grid);

EstimateReport root_music(const CovarianceEstimate& r, int n_sources);
EstimateReport esprit(const CovarianceEstimate& r, int n_sources);

/// All roots of the root-MUSIC polynomial built from C = E_n E_n^H for a
/// uniform array (coefficient of z^k is the sum of the k-th diagonal of C).
std::vector<std::complex<double>> root_music_polynomial_roots(const CMatrix& noise_projector);

/// Roots folded into the closed unit disk (z -> 1/conj(z) for |z| > 1), a
/// numerically split double root merged into one, ordered by closeness to the
/// unit circle and then by phase.
std::vector<std::complex<double>> root_music_candidates(
    const std::vector<std::complex<double>>& roots);

struct Peak {
  double angle_deg = 0.0;
  double value = 0.0;
  bool boundary = false;
};

struct PeakPicks {
  std::vector<Peak> peaks;  // ascending in angle
  bool shortfall = false;   // fewer than k maxima existed
  std::vector<double> angles() const;
  int interior_count() const;
};

/// k largest local maxima (endpoints count and are flagged as boundary),
/// refined by 3-point parabolic interpolation.
PeakPicks pick_peaks(const SpectrumCurve& spectrum, int k);

/// True when the spectrum has two interior peaks, one within half the
/// separation of each source. Used for every resolution decision.
bool resolves_pair(const SpectrumCurve& spectrum, double theta1_deg, double theta2_deg);

}  // namespace doafoundry
