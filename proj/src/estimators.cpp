// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doafoundry/error.hpp"

namespace doafoundry {

namespace {

void check_model_order(const CovarianceEstimate& r, int n_sources) {
  if (n_sources < 1 || n_sources >= r.size()) {
    throw Error(ErrorCode::InvalidModelOrder,
                "need 1 <= n_sources < N, got " + std::to_string(n_sources) + " for N=" +
                    std::to_string(r.size()));
  }
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty angle grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= -90.0 && grid[i] <= 90.0)) {
      throw Error(ErrorCode::InvalidArgument, "grid angle outside [-90, 90]");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "grid must be strictly increasing");
    }
  }
}

double null_spectrum(const CMatrix& en, const ArrayGeometry& g, double theta_deg) {
  return (en.adjoint() * steering_vector(g, theta_deg)).squaredNorm();
}

// Golden-section minimization on [lo, hi].
template <class F>
double golden_minimize(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - inv_phi * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + inv_phi * (b - a); fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double phase_to_angle_deg(double phase, double spacing) {
  const double s = phase / (kPi * spacing);
  if (std::abs(s) > 1.0 + 1e-12) {
    throw Error(ErrorCode::InvalidRoot, "root phase maps to no real angle");
  }
  return rad2deg(std::asin(std::clamp(s, -1.0, 1.0)));
}

void sort_report(EstimateReport& rep) { std::sort(rep.angles_deg.begin(), rep.angles_deg.end()); }

}  // namespace

std::vector<double> make_grid(double lo_deg, double hi_deg, double step_deg) {
  if (!(step_deg > 0.0) || hi_deg < lo_deg) {
    throw Error(ErrorCode::InvalidArgument, "grid needs step > 0 and hi >= lo");
  }
  const auto n = static_cast<std::size_t>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = lo_deg + static_cast<double>(i) * step_deg;
  return grid;
}

SpectrumCurve beamform_spectrum(const CovarianceEstimate& r, const std::vector<double>& grid) {
  check_grid(grid);
  const double n2 = static_cast<double>(r.size()) * r.size();
  SpectrumCurve out{grid, std::vector<double>(grid.size()), "beamforming"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CVector a = steering_vector(r.geometry(), grid[i]);
    out.values[i] = std::max(0.0, a.dot(r.matrix() * a).real() / n2);
  }
  return out;
}

SpectrumCurve capon_spectrum(const CovarianceEstimate& r, const std::vector<double>& grid,
                             double diagonal_loading) {
  check_grid(grid);
  const Eigen::VectorXd loaded = r.eigenvalues().array() + diagonal_loading;
  const double top = loaded.maxCoeff();
  if (!(loaded.minCoeff() > 1e-12 * std::max(top, 1e-300))) {
    throw Error(ErrorCode::Numerical, "covariance is singular after diagonal loading");
  }
  const CMatrix& v = r.eigenvectors();
  SpectrumCurve out{grid, std::vector<double>(grid.size()), "capon"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CVector proj = v.adjoint() * steering_vector(r.geometry(), grid[i]);
    const double q = (proj.array().abs2() / loaded.array()).sum();
    out.values[i] = 1.0 / q;
  }
  return out;
}

SpectrumCurve monopulse_difference(const CovarianceEstimate& r, const std::vector<double>& grid,
                                   double delta_deg) {
  check_grid(grid);
  if (!(delta_deg > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  if (grid.front() - delta_deg / 2 < -90.0 || grid.back() + delta_deg / 2 > 90.0) {
    throw Error(ErrorCode::InvalidArgument, "monopulse grid must be interior by delta/2");
  }
  const double n2 = static_cast<double>(r.size()) * r.size();
  auto power = [&](double th) {
    const CVector a = steering_vector(r.geometry(), th);
    return a.dot(r.matrix() * a).real() / n2;
  };
  SpectrumCurve out{grid, std::vector<double>(grid.size()), "monopulse"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.values[i] = power(grid[i] + delta_deg / 2) - power(grid[i] - delta_deg / 2);
  }
  return out;
}

EstimateReport monopulse_estimate(const CovarianceEstimate& r, const std::vector<double>& grid,
                                  double delta_deg) {
  const auto diff = monopulse_difference(r, grid, delta_deg);
  const auto bf = beamform_spectrum(r, grid);
  const auto peak_it = std::max_element(bf.values.begin(), bf.values.end());
  const double peak = grid[static_cast<std::size_t>(peak_it - bf.values.begin())];

  std::optional<double> best;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double d0 = diff.values[i], d1 = diff.values[i + 1];
    if (d0 > 0.0 && d1 <= 0.0) {
      const double x = grid[i] + (grid[i + 1] - grid[i]) * d0 / (d0 - d1);
      if (!best || std::abs(x - peak) < std::abs(*best - peak)) best = x;
    }
  }
  if (!best) throw Error(ErrorCode::EstimationFailed, "no negative-slope zero crossing in grid");
  EstimateReport rep;
  rep.method = "monopulse";
  rep.angles_deg = {*best};
  rep.spectrum = diff;
  rep.diagnostics["beamforming_peak_deg"] = peak;
  return rep;
}

SpectrumCurve music_spectrum(const CovarianceEstimate& r, int n_sources,
                             const std::vector<double>& grid) {
  check_model_order(r, n_sources);
  check_grid(grid);
  const CMatrix en = r.noise_subspace(n_sources);
  SpectrumCurve out{grid, std::vector<double>(grid.size()), "music"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double den = null_spectrum(en, r.geometry(), grid[i]);
    out.values[i] = 1.0 / std::max(den, std::numeric_limits<double>::min());
  }
  return out;
}

EstimateReport music_estimate(const CovarianceEstimate& r, int n_sources,
                              const std::vector<double>& grid) {
  EstimateReport rep;
  rep.method = "music";
  rep.spectrum = music_spectrum(r, n_sources, grid);
  const auto picks = pick_peaks(*rep.spectrum, n_sources);
  if (picks.shortfall) rep.flags.push_back("peak-shortfall");
  const CMatrix en = r.noise_subspace(n_sources);
  const double step = grid.size() > 1 ? grid[1] - grid[0] : 0.1;
  for (const auto& p : picks.peaks) {
    if (p.boundary) {
      rep.angles_deg.push_back(p.angle_deg);
      continue;
    }
    const double lo = std::max(-90.0, p.angle_deg - step);
    const double hi = std::min(90.0, p.angle_deg + step);
    rep.angles_deg.push_back(golden_minimize(
        [&](double th) { return null_spectrum(en, r.geometry(), th); }, lo, hi, 1e-10));
  }
  sort_report(rep);
  return rep;
}

std::vector<std::complex<double>> root_music_polynomial_roots(const CMatrix& c) {
  const auto n = c.rows();
  // coeff[k + n - 1] multiplies z^(k + n - 1), k = -(n-1) .. n-1.
  std::vector<std::complex<double>> coeff(static_cast<std::size_t>(2 * n - 1));
  for (Eigen::Index k = -(n - 1); k <= n - 1; ++k) {
    std::complex<double> sum = 0.0;
    for (Eigen::Index m = std::max<Eigen::Index>(0, -k); m < n && m + k < n; ++m) {
      sum += c(m, m + k);
    }
    coeff[static_cast<std::size_t>(k + n - 1)] = sum;
  }
  const auto degree = static_cast<Eigen::Index>(coeff.size()) - 1;
  const std::complex<double> lead = coeff.back();
  if (std::abs(lead) == 0.0) {
    throw Error(ErrorCode::Numerical, "root-MUSIC polynomial has a vanishing leading coefficient");
  }
  CMatrix companion = CMatrix::Zero(degree, degree);
  for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < degree; ++i) {
    companion(i, degree - 1) = -coeff[static_cast<std::size_t>(i)] / lead;
  }
  Eigen::ComplexEigenSolver<CMatrix> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::Numerical, "polynomial root finding did not converge");
  }
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<std::complex<double>> root_music_candidates(
    const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> folded;
  folded.reserve(roots.size());
  for (auto z : roots) {
    if (std::abs(z) == 0.0) continue;
    folded.push_back(std::abs(z) > 1.0 ? 1.0 / std::conj(z) : z);
  }
  std::sort(folded.begin(), folded.end(), [](auto a, auto b) {
    const double da = 1.0 - std::abs(a), db = 1.0 - std::abs(b);
    if (da != db) return da < db;
    return std::arg(a) < std::arg(b);
  });
  // A root pair (z, 1/z*) folds onto one point; an exact double root on the
  // circle splits by about sqrt(eps) and is merged by averaging.
  constexpr double kMergeTol = 1e-5;
  std::vector<std::complex<double>> out;
  std::vector<char> used(folded.size(), 0);
  for (std::size_t i = 0; i < folded.size(); ++i) {
    if (used[i]) continue;
    std::complex<double> acc = folded[i];
    int count = 1;
    for (std::size_t j = i + 1; j < folded.size(); ++j) {
      if (!used[j] && std::abs(folded[j] - folded[i]) < kMergeTol) {
        used[j] = 1;
        acc += folded[j];
        ++count;
        break;
      }
    }
    out.push_back(acc / static_cast<double>(count));
  }
  return out;
}

EstimateReport root_music(const CovarianceEstimate& r, int n_sources) {
  check_model_order(r, n_sources);
  const double spacing = r.geometry().uniform_spacing();
  const CMatrix en = r.noise_subspace(n_sources);
  EstimateReport rep;
  rep.method = "root-music";
  rep.roots = root_music_polynomial_roots(en * en.adjoint());
  const auto cand = root_music_candidates(rep.roots);
  if (static_cast<int>(cand.size()) < n_sources) {
    throw Error(ErrorCode::InvalidRoot, "fewer candidate roots than sources");
  }
  for (int k = 0; k < n_sources; ++k) {
    rep.angles_deg.push_back(phase_to_angle_deg(std::arg(cand[k]), spacing));
    rep.diagnostics["root_radius_" + std::to_string(k)] = std::abs(cand[k]);
  }
  rep.diagnostics["noise_subspace_dim"] = r.size() - n_sources;
  sort_report(rep);
  return rep;
}

EstimateReport esprit(const CovarianceEstimate& r, int n_sources) {
  check_model_order(r, n_sources);
  const double spacing = r.geometry().uniform_spacing();
  const CMatrix es = r.signal_subspace(n_sources);
  const auto n = es.rows();
  const CMatrix upper = es.topRows(n - 1);
  const CMatrix lower = es.bottomRows(n - 1);

  Eigen::JacobiSVD<CMatrix> svd(upper);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    throw Error(ErrorCode::Degenerate, "subarray signal subspace is rank deficient");
  }
  const CMatrix psi = upper.colPivHouseholderQr().solve(lower);
  Eigen::ComplexEigenSolver<CMatrix> solver(psi, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::Numerical, "ESPRIT rotation eigen-decomposition failed");
  }
  EstimateReport rep;
  rep.method = "esprit";
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const auto z = solver.eigenvalues()(k);
    rep.roots.push_back(z);
    rep.angles_deg.push_back(phase_to_angle_deg(std::arg(z), spacing));
  }
  rep.diagnostics["signal_subspace_dim"] = n_sources;
  sort_report(rep);
  return rep;
}

std::vector<double> PeakPicks::angles() const {
  std::vector<double> out;
  for (const auto& p : peaks) out.push_back(p.angle_deg);
  return out;
}

int PeakPicks::interior_count() const {
  return static_cast<int>(
      std::count_if(peaks.begin(), peaks.end(), [](const Peak& p) { return !p.boundary; }));
}

PeakPicks pick_peaks(const SpectrumCurve& spectrum, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const auto& g = spectrum.grid_deg;
  const auto& v = spectrum.values;
  const std::size_t n = v.size();
  struct Raw {
    std::size_t index;
    bool boundary;
  };
  std::vector<Raw> raw;
  if (n == 1) {
    raw.push_back({0, true});
  } else if (n > 1) {
    if (v[0] > v[1]) raw.push_back({0, true});
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (v[i] > v[i - 1] && v[i] >= v[i + 1]) raw.push_back({i, false});
    }
    if (v[n - 1] > v[n - 2]) raw.push_back({n - 1, true});
  }
  std::stable_sort(raw.begin(), raw.end(),
                   [&](const Raw& a, const Raw& b) { return v[a.index] > v[b.index]; });

  PeakPicks out;
  out.shortfall = static_cast<int>(raw.size()) < k;
  if (static_cast<int>(raw.size()) > k) raw.resize(static_cast<std::size_t>(k));
  for (const auto& r : raw) {
    Peak p{g[r.index], v[r.index], r.boundary};
    if (!r.boundary) {
      // Parabola through three (possibly non-uniform) grid points.
      const double x0 = g[r.index - 1], x1 = g[r.index], x2 = g[r.index + 1];
      const double y0 = v[r.index - 1], y1 = v[r.index], y2 = v[r.index + 1];
      const double d1 = (y1 - y0) / (x1 - x0), d2 = (y2 - y1) / (x2 - x1);
      const double curv = (d2 - d1) / (x2 - x0);
      if (curv < 0.0) {
        const double vertex = 0.5 * (x0 + x1) - d1 / (2.0 * curv);
        p.angle_deg = std::clamp(vertex, x0, x2);
      }
    }
    out.peaks.push_back(p);
  }
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const Peak& a, const Peak& b) { return a.angle_deg < b.angle_deg; });
  return out;
}

bool resolves_pair(const SpectrumCurve& spectrum, double theta1_deg, double theta2_deg) {
  const double half = std::abs(theta2_deg - theta1_deg) / 2.0;
  const auto picks = pick_peaks(spectrum, 2);
  if (picks.peaks.size() != 2 || picks.interior_count() != 2) return false;
  const double lo = std::min(theta1_deg, theta2_deg), hi = std::max(theta1_deg, theta2_deg);
  return std::abs(picks.peaks[0].angle_deg - lo) < half &&
         std::abs(picks.peaks[1].angle_deg - hi) < half;
}

}  // namespace doafoundry
