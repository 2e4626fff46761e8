// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/quantization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "doafoundry/analysis.hpp"
#include "doafoundry/error.hpp"

namespace doafoundry {

double QuantizerConfig::step() const { return 2.0 * clip_sigma * rail_sigma / std::ldexp(1.0, bits); }

void QuantizerConfig::validate() const {
  if (bits < 1 || bits > 24) throw Error(ErrorCode::InvalidArgument, "quantizer bits must be in [1, 24]");
  if (!(clip_sigma > 0.0) || !(rail_sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "clip range and rail sigma must be positive");
  }
}

double quantize_rail(double value, const QuantizerConfig& cfg) {
  const double limit = cfg.clip_sigma * cfg.rail_sigma;
  const double step = cfg.step();
  const double half_levels = std::ldexp(1.0, cfg.bits - 1);
  double index = std::floor(std::clamp(value, -limit, limit) / step);
  index = std::clamp(index, -half_levels, half_levels - 1.0);
  return (index + 0.5) * step;
}

SnapshotMatrix quantize(const SnapshotMatrix& x, const QuantizerConfig& cfg) {
  cfg.validate();
  SnapshotMatrix out{x.data, x.geometry};
  for (Eigen::Index j = 0; j < out.data.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.data.rows(); ++i) {
      const auto v = out.data(i, j);
      out.data(i, j) = {quantize_rail(v.real(), cfg), quantize_rail(v.imag(), cfg)};
    }
  }
  return out;
}

double rail_sigma_for(const EmitterScenario& scenario) {
  double power = scenario.noise_enabled ? 1.0 : 0.0;
  for (double s : scenario.snr_db) power += db2lin(s);
  return std::sqrt(power / 2.0);
}

namespace {

double normal_pdf(double x) {
  return std::isinf(x) ? 0.0 : std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double lloyd_max_distortion(int levels) {
  if (levels < 1) throw Error(ErrorCode::InvalidArgument, "need at least one level");
  if (levels == 1) return 1.0;
  const auto n = static_cast<std::size_t>(levels);
  std::vector<double> c(n), t(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = -3.0 + 6.0 * (static_cast<double>(i) + 0.5) / levels;
  }
  t.front() = -INFINITY;
  t.back() = INFINITY;
  double distortion = 1.0;
  for (int iter = 0; iter < 200000; ++iter) {
    for (std::size_t i = 1; i < n; ++i) t[i] = 0.5 * (c[i - 1] + c[i]);
    double change = 0.0;
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = normal_cdf(t[i + 1]) - normal_cdf(t[i]);
      const double centroid = (normal_pdf(t[i]) - normal_pdf(t[i + 1])) / p;
      change = std::max(change, std::abs(centroid - c[i]));
      c[i] = centroid;
      energy += p * centroid * centroid;
    }
    distortion = 1.0 - energy;
    if (change < 1e-14) break;
  }
  return distortion;
}

AqnmModel aqnm_model(int bits) {
  if (bits < 1) throw Error(ErrorCode::InvalidArgument, "bits must be >= 1");
  static const std::array<double, 5> table = [] {
    std::array<double, 5> r{};
    for (int b = 1; b <= 5; ++b) r[static_cast<std::size_t>(b - 1)] = lloyd_max_distortion(1 << b);
    return r;
  }();
  AqnmModel m;
  m.bits = bits;
  m.rho = bits <= 5 ? table[static_cast<std::size_t>(bits - 1)]
                    : kPi * std::sqrt(3.0) / 2.0 * std::ldexp(1.0, -2 * bits);
  m.alpha = 1.0 - m.rho;
  return m;
}

CMatrix quantized_covariance_model(const CMatrix& r_exact, const AqnmModel& model) {
  const double a = model.alpha;
  CMatrix out = a * a * r_exact;
  for (Eigen::Index i = 0; i < r_exact.rows(); ++i) out(i, i) += a * (1.0 - a) * r_exact(i, i).real();
  return out;
}

CrlbReport crlb_quantized(int elements, double snr_db, int snapshots, double theta_deg, int bits) {
  const auto model = aqnm_model(bits);
  auto rep = crlb_numeric_fim(ArrayGeometry::ula(elements),
                              EmitterScenario::single(theta_deg, snr_db, snapshots, 0),
                              FimModel::quantized(model, elements));
  rep.parameters["bits"] = bits;
  rep.parameters["rho"] = model.rho;
  return rep;
}

double performance_loss_db(int elements, double snr_db, int snapshots, double theta_deg, int bits) {
  const auto sc = EmitterScenario::single(theta_deg, snr_db, snapshots, 0);
  const double exact =
      crlb_numeric_fim(ArrayGeometry::ula(elements), sc, FimModel::exact()).variance_deg2;
  const double quant = crlb_quantized(elements, snr_db, snapshots, theta_deg, bits).variance_deg2;
  return 10.0 * std::log10(quant / exact);
}

double required_snr_db(int elements, int snapshots, double theta_deg, int bits,
                       double target_variance_deg2, double lo_db, double hi_db) {
  if (!(target_variance_deg2 > 0.0) || !(lo_db < hi_db)) {
    throw Error(ErrorCode::InvalidArgument, "need a positive target and lo < hi");
  }
  auto excess = [&](double snr) {
    return crlb_quantized(elements, snr, snapshots, theta_deg, bits).variance_deg2 -
           target_variance_deg2;
  };
  if (excess(lo_db) <= 0.0) return lo_db;
  if (excess(hi_db) > 0.0) {
    throw Error(ErrorCode::EstimationFailed, "target variance not reachable in the SNR bracket");
  }
  while (hi_db - lo_db > 1e-6) {
    const double mid = 0.5 * (lo_db + hi_db);
    (excess(mid) > 0.0 ? lo_db : hi_db) = mid;
  }
  return 0.5 * (lo_db + hi_db);
}

int MixedAdcConfig::chains() const { return subarray_size > 0 ? antennas / subarray_size : 0; }

std::vector<int> MixedAdcConfig::channel_bits() const {
  std::vector<int> bits(static_cast<std::size_t>(chains()), low_bits);
  std::fill_n(bits.begin(), std::min(m0, chains()), high_bits);
  return bits;
}

void MixedAdcConfig::validate() const {
  if (antennas < 1 || subarray_size < 1 || antennas % subarray_size != 0) {
    throw Error(ErrorCode::InvalidArgument, "antennas must be a positive multiple of the subarray size");
  }
  if (m0 < 0 || m0 > chains()) throw Error(ErrorCode::InvalidArgument, "m0 must be in [0, chains]");
  if (low_bits < 1 || high_bits < 1) throw Error(ErrorCode::InvalidArgument, "bits must be >= 1");
}

namespace {

std::vector<double> channel_gains(const MixedAdcConfig& cfg) {
  std::vector<double> g;
  const double low_alpha = aqnm_model(cfg.low_bits).alpha;
  for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.chains()); ++i) {
    g.push_back(static_cast<int>(i) < cfg.m0 ? 1.0 : low_alpha);
  }
  return g;
}

}  // namespace

CMatrix mixed_covariance_model(const CMatrix& r_channels, const MixedAdcConfig& cfg) {
  cfg.validate();
  FimModel model;
  model.channel_alpha = channel_gains(cfg);
  return model.covariance(r_channels);
}

CrlbReport crlb_mixed(const MixedAdcConfig& cfg, double snr_db, int snapshots, double theta_deg) {
  cfg.validate();
  FimModel model;
  const int ma = cfg.subarray_size;
  if (cfg.hybrid()) {
    CMatrix w = CMatrix::Zero(cfg.antennas, cfg.chains());
    const double s = std::sin(deg2rad(theta_deg));
    for (int k = 0; k < cfg.chains(); ++k) {
      for (int m = 0; m < ma; ++m) {
        w(k * ma + m, k) = std::polar(1.0 / ma, kPi * m * s);
      }
    }
    model.combiner = std::move(w);
  }
  model.channel_alpha = channel_gains(cfg);
  auto rep = crlb_numeric_fim(ArrayGeometry::ula(cfg.antennas),
                              EmitterScenario::single(theta_deg, snr_db, snapshots, 0), model);
  rep.bound_kind = cfg.hybrid() ? BoundKind::Hybrid : BoundKind::Quantized;
  rep.parameters["m0"] = cfg.m0;
  rep.parameters["subarray_size"] = ma;
  return rep;
}

void PowerModel::validate() const {
  for (double p : {p_rf_chain, p_adc_ref, p_phase_shifter, p_lna, p_baseband}) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidArgument, "component powers must be finite and non-negative");
    }
  }
}

double power_total(const MixedAdcConfig& cfg, const PowerModel& pm) {
  cfg.validate();
  pm.validate();
  double p = cfg.antennas * pm.p_lna + cfg.chains() * pm.p_rf_chain + pm.p_baseband;
  if (cfg.hybrid()) p += cfg.antennas * pm.p_phase_shifter;
  for (int b : cfg.channel_bits()) p += 2.0 * pm.p_adc_ref * std::ldexp(1.0, b);
  return p;
}

double energy_efficiency(const CrlbReport& crlb, double p_total_w) {
  if (!(p_total_w > 0.0) || !(crlb.variance_deg2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "power and bound must be positive");
  }
  return 1.0 / std::sqrt(crlb.variance_deg2) / p_total_w;
}

}  // namespace doafoundry
