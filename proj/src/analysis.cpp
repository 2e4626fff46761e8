// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/analysis.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "doafoundry/error.hpp"
#include "doafoundry/estimators.hpp"
#include "doafoundry/random.hpp"

namespace doafoundry {

const char* to_string(BoundKind kind) noexcept {
  switch (kind) {
    case BoundKind::FullDigitalUla: return "full-digital-ula";
    case BoundKind::NumericFim: return "numeric-fim";
    case BoundKind::Hybrid: return "hybrid";
    case BoundKind::Quantized: return "quantized";
  }
  return "unknown";
}

double CrlbReport::rmse_deg() const { return std::sqrt(variance_deg2); }

CrlbReport crlb_ula_single(int elements, double snr_db, int snapshots, double theta_deg) {
  if (elements < 2) throw Error(ErrorCode::InvalidArgument, "closed-form bound needs N >= 2");
  if (snapshots < 1) throw Error(ErrorCode::InvalidArgument, "snapshot count must be >= 1");
  CrlbReport rep;
  rep.bound_kind = BoundKind::FullDigitalUla;
  rep.parameters = {{"N", elements}, {"snr_db", snr_db}, {"L", snapshots}, {"theta_deg", theta_deg}};
  if (std::abs(theta_deg) > 89.9) {
    rep.divergent = true;
    rep.variance_deg2 = std::numeric_limits<double>::infinity();
    return rep;
  }
  const double n = elements;
  const double c = std::cos(deg2rad(theta_deg));
  const double var_rad =
      6.0 / (snapshots * db2lin(snr_db) * n * (n * n - 1.0) * kPi * kPi * c * c);
  rep.variance_deg2 = var_rad * rad2deg(1.0) * rad2deg(1.0);
  return rep;
}

FimModel FimModel::exact() { return {}; }

FimModel FimModel::quantized(const AqnmModel& model, int channels) {
  FimModel m;
  m.channel_alpha.assign(static_cast<std::size_t>(channels), model.alpha);
  return m;
}

FimModel FimModel::hybrid(CMatrix combiner) {
  FimModel m;
  m.combiner = std::move(combiner);
  return m;
}

BoundKind FimModel::kind() const {
  if (combiner) return BoundKind::Hybrid;
  if (!channel_alpha.empty()) return BoundKind::Quantized;
  return BoundKind::NumericFim;
}

CMatrix FimModel::covariance(const CMatrix& r_elements) const {
  CMatrix r = combiner ? CMatrix(combiner->adjoint() * r_elements * *combiner) : r_elements;
  if (channel_alpha.empty()) return r;
  if (static_cast<Eigen::Index>(channel_alpha.size()) != r.rows()) {
    throw Error(ErrorCode::InvalidArgument, "one AQNM gain per output channel is required");
  }
  const Eigen::Map<const Eigen::VectorXd> g(channel_alpha.data(), r.rows());
  CMatrix out = g.asDiagonal() * r * g.asDiagonal();
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    out(i, i) += g(i) * (1.0 - g(i)) * r(i, i).real();
  }
  return out;
}

double fisher_information_numeric(const std::function<CMatrix(double)>& model_rad,
                                  double theta_rad, int snapshots, double* richardson_rel) {
  constexpr double h = 1e-4;
  const CMatrix r = model_rad(theta_rad);
  Eigen::LDLT<CMatrix> ldlt(r);
  if (ldlt.info() != Eigen::Success) {
    throw Error(ErrorCode::Unidentifiable, "model covariance is not invertible");
  }
  auto central = [&](double step) {
    return CMatrix((model_rad(theta_rad + step) - model_rad(theta_rad - step)) / (2.0 * step));
  };
  auto information = [&](const CMatrix& dr) {
    const CMatrix x = ldlt.solve(dr);
    return snapshots * (x * x).trace().real();
  };
  const CMatrix d_coarse = central(h);
  const CMatrix d_fine = central(h / 2.0);
  const CMatrix d_extrapolated = (4.0 * d_fine - d_coarse) / 3.0;
  const double fim = information(d_extrapolated);
  if (richardson_rel) *richardson_rel = std::abs(information(d_coarse) - fim) / std::abs(fim);
  return fim;
}

CrlbReport crlb_numeric_fim(const ArrayGeometry& geometry, const EmitterScenario& scenario,
                            const FimModel& model) {
  scenario.validate();
  if (scenario.angles_deg.size() != 1) {
    throw Error(ErrorCode::InvalidArgument, "numeric bound is defined for a single emitter");
  }
  const double theta = scenario.angles_deg.front();
  if (std::abs(theta) > 89.9) {
    throw Error(ErrorCode::Unidentifiable, "bound diverges near endfire");
  }
  const double power = db2lin(scenario.snr_db.front());
  const bool noise = scenario.noise_enabled;
  auto model_rad = [&](double th_rad) {
    const CVector a = steering_vector(geometry, rad2deg(th_rad));
    CMatrix r = power * a * a.adjoint();
    if (noise) r += CMatrix::Identity(a.size(), a.size());
    return model.covariance(r);
  };
  double rich = 0.0;
  const double fim = fisher_information_numeric(model_rad, deg2rad(theta), scenario.snapshots, &rich);
  if (!(fim > 0.0) || !std::isfinite(fim)) {
    throw Error(ErrorCode::Unidentifiable, "Fisher information is not positive");
  }
  CrlbReport rep;
  rep.bound_kind = model.kind();
  rep.variance_deg2 = rad2deg(1.0) * rad2deg(1.0) / fim;
  rep.parameters = {{"N", geometry.size()},
                    {"snr_db", scenario.snr_db.front()},
                    {"L", scenario.snapshots},
                    {"theta_deg", theta},
                    {"richardson_rel_change", rich}};
  return rep;
}

double beamwidth_deg(int elements) {
  if (elements < 2) throw Error(ErrorCode::InvalidArgument, "beamwidth needs N >= 2");
  return rad2deg(0.886 * 2.0 / elements);
}

double resolution_predict(double bw_deg, double snr_db) {
  if (!std::isfinite(snr_db)) throw Error(ErrorCode::InvalidArgument, "SNR must be finite");
  return bw_deg / std::pow(db2lin(snr_db), 0.25);
}

namespace {

constexpr std::uint64_t kResolutionStream = 0x5245'534fULL;

}  // namespace

double resolution_success_rate(ResolvingEstimator estimator, int elements, int snapshots,
                               double snr_db, double separation_deg, int trials,
                               std::uint64_t seed, double grid_step_deg) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
  const auto geometry = ArrayGeometry::ula(elements);
  const auto grid = make_grid(-90.0, 90.0, grid_step_deg);
  const double t1 = -separation_deg / 2.0, t2 = separation_deg / 2.0;
  std::vector<char> ok(static_cast<std::size_t>(trials), 0);
  parallel_for(ok.size(), [&](std::size_t t) {
    const auto sc = EmitterScenario::equal_power({t1, t2}, snr_db, snapshots,
                                                 derive_seed(seed, kResolutionStream, t));
    const auto r = sample_covariance(synthesize_snapshots(sc, geometry));
    const auto spec = estimator == ResolvingEstimator::Beamforming ? beamform_spectrum(r, grid)
                                                                   : music_spectrum(r, 2, grid);
    ok[t] = resolves_pair(spec, t1, t2);
  });
  return static_cast<double>(std::count(ok.begin(), ok.end(), 1)) / trials;
}

double empirical_resolution(ResolvingEstimator estimator, int elements, int snapshots,
                            double snr_db, int trials, std::uint64_t seed,
                            const ResolutionOptions& options) {
  auto rate = [&](double sep) {
    return resolution_success_rate(estimator, elements, snapshots, snr_db, sep, trials, seed,
                                   options.grid_step_deg);
  };
  double lo = options.grid_step_deg;
  double hi = options.max_separation_deg;
  if (rate(lo) >= 0.5) return lo;
  if (rate(hi) < 0.5) {
    throw Error(ErrorCode::EstimationFailed, "pair not resolved even at the maximum separation");
  }
  while (hi - lo > options.tolerance_deg) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) >= 0.5 ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace doafoundry
