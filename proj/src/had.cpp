// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/had.hpp"

#include <algorithm>
#include <cmath>

#include "doafoundry/analysis.hpp"
#include "doafoundry/error.hpp"
#include "doafoundry/random.hpp"

namespace doafoundry {

namespace {

constexpr std::uint64_t kBlockStream = 0x4841'4442ULL;
constexpr double kTieRelative = 1e-9;
constexpr const char* kTieFlag = "apa-tie-smaller-abs-angle";

void check_dims(int subarrays, int per_subarray) {
  if (subarrays < 1 || per_subarray < 1) {
    throw Error(ErrorCode::InvalidArgument, "K and M must be positive");
  }
}

// Digital beam power d^H R d with d_k = exp(j pi k M sin theta).
double digital_power(const CMatrix& ry, int per_subarray, double theta_deg) {
  const double s = std::sin(deg2rad(theta_deg));
  CVector d(ry.rows());
  for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = std::polar(1.0, kPi * k * per_subarray * s);
  return (d.adjoint() * ry * d)(0, 0).real();
}

double digital_power(const CMatrix& ry, std::complex<double> z) {
  CVector d(ry.rows());
  const double phi = std::arg(z);
  for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = std::polar(1.0, phi * k);
  return (d.adjoint() * ry * d)(0, 0).real();
}

CMatrix block_covariance(const CMatrix& y) { return y * y.adjoint() / static_cast<double>(y.cols()); }

double mean_power(const CMatrix& y) { return y.squaredNorm() / static_cast<double>(y.size()); }

// Index of the largest power; near-ties go to the smaller |angle| and are flagged.
std::size_t elect(const std::vector<double>& angles, const std::vector<double>& powers,
                  EstimateReport& rep) {
  const double best = *std::max_element(powers.begin(), powers.end());
  std::size_t pick = angles.size();
  int tied = 0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (best - powers[i] <= kTieRelative * std::abs(best)) {
      ++tied;
      if (pick == angles.size() || std::abs(angles[i]) < std::abs(angles[pick])) pick = i;
    }
  }
  if (tied > 1) rep.flags.emplace_back(kTieFlag);
  return pick;
}

std::vector<double> apa_powers(EmitterStream& stream, const std::vector<double>& candidates) {
  std::vector<double> powers;
  for (double c : candidates) {
    const auto x = stream.next_block();
    powers.push_back(
        mean_power(analog_combine(x.data, steering_phases(stream.subarrays(), stream.per_subarray(), c))));
  }
  return powers;
}

struct FirstBlock {
  AmbiguityCandidateSet set;
  double elected_root_phase = 0.0;
};

FirstBlock root_music_first_block(EmitterStream& stream, EstimateReport& rep) {
  const int k = stream.subarrays(), m = stream.per_subarray();
  if (k < 2) throw Error(ErrorCode::Precondition, "root-MUSIC needs K >= 2");
  const auto x = stream.next_block();
  const CMatrix y = analog_combine(x.data, zero_phases(k, m));
  const CovarianceEstimate ry(block_covariance(y), static_cast<int>(y.cols()), ArrayGeometry::ula(k, m));
  const CMatrix en = ry.noise_subspace(1);
  rep.roots = root_music_polynomial_roots(en * en.adjoint());
  const auto roots = root_music_candidates(rep.roots);
  if (roots.empty()) throw Error(ErrorCode::InvalidRoot, "no root-MUSIC root available");
  std::size_t best = 0;
  double best_power = -1.0;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const double p = digital_power(ry.matrix(), roots[i]);
    if (p > best_power) {
      best_power = p;
      best = i;
    }
  }
  FirstBlock fb;
  fb.elected_root_phase = std::arg(roots[best]);
  const double base = rad2deg(std::asin(std::clamp(fb.elected_root_phase / (kPi * m), -1.0, 1.0)));
  fb.set = ambiguity_candidates(base, m);
  rep.diagnostics["base_estimate_deg"] = base;
  rep.diagnostics["elected_root_radius"] = std::abs(roots[best]);
  rep.diagnostics["candidates"] = static_cast<double>(fb.set.candidates_deg.size());
  return fb;
}

}  // namespace

ArrayGeometry HadConfig::geometry() const { return ArrayGeometry::had(subarrays, per_subarray); }

void HadConfig::validate() const {
  check_dims(subarrays, per_subarray);
  for (const auto& p : phase_sets) {
    if (p.rows() != subarrays || p.cols() != per_subarray) {
      throw Error(ErrorCode::Configuration, "phase set must be K x M");
    }
  }
}

PhaseSet steering_phases(int subarrays, int per_subarray, double theta_deg) {
  check_dims(subarrays, per_subarray);
  const double s = std::sin(deg2rad(theta_deg));
  PhaseSet p(subarrays, per_subarray);
  for (int m = 0; m < per_subarray; ++m) p.col(m).setConstant(kPi * m * s);
  return p;
}

PhaseSet zero_phases(int subarrays, int per_subarray) {
  check_dims(subarrays, per_subarray);
  return PhaseSet::Zero(subarrays, per_subarray);
}

CMatrix hybrid_combiner(const PhaseSet& phases) {
  const auto k_count = phases.rows(), m_count = phases.cols();
  CMatrix w = CMatrix::Zero(k_count * m_count, k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    for (Eigen::Index m = 0; m < m_count; ++m) {
      w(k * m_count + m, k) = std::polar(1.0 / static_cast<double>(m_count), phases(k, m));
    }
  }
  return w;
}

CMatrix analog_combine(const CMatrix& x, const PhaseSet& phases) {
  const auto k_count = phases.rows(), m_count = phases.cols();
  if (x.rows() != k_count * m_count) {
    throw Error(ErrorCode::InvalidArgument, "snapshot rows must equal K*M");
  }
  CMatrix y(k_count, x.cols());
  for (Eigen::Index k = 0; k < k_count; ++k) {
    CVector w(m_count);
    for (Eigen::Index m = 0; m < m_count; ++m) {
      w(m) = std::polar(1.0 / static_cast<double>(m_count), -phases(k, m));
    }
    y.row(k) = w.transpose() * x.middleRows(k * m_count, m_count);
  }
  return y;
}

CMatrix analog_combine(const SnapshotMatrix& x, const HadConfig& cfg, std::size_t block) {
  cfg.validate();
  if (block >= cfg.phase_sets.size()) {
    throw Error(ErrorCode::Configuration, "no phase set defined for time block " + std::to_string(block));
  }
  if (x.geometry.size() != cfg.elements()) {
    throw Error(ErrorCode::InvalidArgument, "snapshots do not match the HAD geometry");
  }
  return analog_combine(x.data, cfg.phase_sets[block]);
}

EmitterStream::EmitterStream(EmitterScenario scenario, int subarrays, int per_subarray)
    : scenario_(std::move(scenario)),
      geometry_(ArrayGeometry::had(subarrays, per_subarray)),
      subarrays_(subarrays),
      per_subarray_(per_subarray) {
  scenario_.validate();
}

SnapshotMatrix EmitterStream::next_block() {
  EmitterScenario sc = scenario_;
  sc.seed = derive_seed(scenario_.seed, kBlockStream, static_cast<std::uint64_t>(blocks_used_));
  ++blocks_used_;
  return synthesize_snapshots(sc, geometry_);
}

AmbiguityCandidateSet ambiguity_candidates(double base_estimate_deg, int per_subarray) {
  if (per_subarray < 1) throw Error(ErrorCode::InvalidArgument, "M must be positive");
  if (!(std::abs(base_estimate_deg) < 90.0)) {
    throw Error(ErrorCode::InvalidArgument, "base estimate must lie in (-90, 90)");
  }
  const double s = std::sin(deg2rad(base_estimate_deg));
  const double period = 2.0 / per_subarray;
  AmbiguityCandidateSet set;
  set.base_estimate_deg = base_estimate_deg;
  const int q_lo = static_cast<int>(std::ceil((-1.0 - s) / period)) - 1;
  const int q_hi = static_cast<int>(std::floor((1.0 - s) / period)) + 1;
  for (int q = q_lo; q <= q_hi; ++q) {
    const double c = s + q * period;
    if (c > -1.0 && c < 1.0) set.candidates_deg.push_back(rad2deg(std::asin(c)));
  }
  return set;
}

EstimateReport hdapa_estimate(EmitterStream& stream, double coarse_step_deg, double fine_step_deg) {
  if (!(coarse_step_deg > 0.0) || !(fine_step_deg > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "search steps must be positive");
  }
  const int k = stream.subarrays(), m = stream.per_subarray();
  const int start = stream.blocks_used();
  EstimateReport rep;
  rep.method = "hdapa";

  const auto coarse = make_grid(-90.0, 90.0, coarse_step_deg);
  std::vector<double> powers;
  for (double c : coarse) {
    const auto x = stream.next_block();
    const CMatrix y = analog_combine(x.data, steering_phases(k, m, c));
    powers.push_back(digital_power(block_covariance(y), m, c));
  }
  const double apa = coarse[elect(coarse, powers, rep)];

  const auto x = stream.next_block();
  const CMatrix ry = block_covariance(analog_combine(x.data, steering_phases(k, m, apa)));
  const auto fine = make_grid(std::max(-90.0, apa - coarse_step_deg),
                              std::min(90.0, apa + coarse_step_deg), fine_step_deg);
  std::vector<double> fine_powers;
  for (double t : fine) fine_powers.push_back(digital_power(ry, m, t));
  rep.angles_deg = {fine[elect(fine, fine_powers, rep)]};
  rep.time_blocks = stream.blocks_used() - start;
  rep.diagnostics["apa_angle_deg"] = apa;
  rep.diagnostics["apa_angles"] = static_cast<double>(coarse.size());
  return rep;
}

EstimateReport dapa_estimate(EmitterStream& stream, double fine_step_deg) {
  if (!(fine_step_deg > 0.0)) throw Error(ErrorCode::InvalidArgument, "search step must be positive");
  const int k = stream.subarrays(), m = stream.per_subarray();
  const int start = stream.blocks_used();
  EstimateReport rep;
  rep.method = "dapa";

  const auto x = stream.next_block();
  const CMatrix ry = block_covariance(analog_combine(x.data, zero_phases(k, m)));
  auto grid = make_grid(-90.0, 90.0, fine_step_deg);
  grid.erase(std::remove_if(grid.begin(), grid.end(), [](double t) { return std::abs(t) >= 90.0; }),
             grid.end());
  std::vector<double> powers;
  for (double t : grid) powers.push_back(digital_power(ry, m, t));
  const double base = grid[elect(grid, powers, rep)];

  const auto set = ambiguity_candidates(base, m);
  if (set.candidates_deg.empty()) {
    throw Error(ErrorCode::AmbiguityResolutionFailed, "empty candidate set");
  }
  const auto apa = apa_powers(stream, set.candidates_deg);
  rep.angles_deg = {set.candidates_deg[elect(set.candidates_deg, apa, rep)]};
  rep.time_blocks = stream.blocks_used() - start;
  rep.diagnostics["base_estimate_deg"] = base;
  rep.diagnostics["candidates"] = static_cast<double>(set.candidates_deg.size());
  return rep;
}

EstimateReport root_music_hdapa(EmitterStream& stream) {
  const int start = stream.blocks_used();
  EstimateReport rep;
  rep.method = "root-music-hdapa";
  const auto fb = root_music_first_block(stream, rep);
  const auto& cand = fb.set.candidates_deg;
  if (cand.empty()) throw Error(ErrorCode::AmbiguityResolutionFailed, "empty candidate set");
  const auto powers = apa_powers(stream, cand);
  rep.angles_deg = {cand[elect(cand, powers, rep)]};
  rep.time_blocks = stream.blocks_used() - start;
  const int k = stream.subarrays(), m = stream.per_subarray();
  rep.flops = complexity_flops(HadMethod::Original, k, m, stream.scenario().snapshots, k * m);
  return rep;
}

EstimateReport fast_ambiguity_elimination(EmitterStream& stream) {
  const int k = stream.subarrays(), m = stream.per_subarray();
  if (k < m) {
    throw Error(ErrorCode::Precondition, "fast elimination requires K≥M (K=" + std::to_string(k) +
                                             ", M=" + std::to_string(m) + ")");
  }
  const int start = stream.blocks_used();
  EstimateReport rep;
  rep.method = "fast-ambiguity-elimination";
  const auto fb = root_music_first_block(stream, rep);
  const auto& cand = fb.set.candidates_deg;
  if (cand.empty()) throw Error(ErrorCode::AmbiguityResolutionFailed, "empty candidate set");

  const auto groups = cand.size();
  PhaseSet phases(k, m);
  for (int sub = 0; sub < k; ++sub) {
    phases.row(sub) = steering_phases(1, m, cand[static_cast<std::size_t>(sub) % groups]).row(0);
  }
  const auto x = stream.next_block();
  const CMatrix y = analog_combine(x.data, phases);
  std::vector<double> sums(groups, 0.0), counts(groups, 0.0);
  for (int sub = 0; sub < k; ++sub) {
    const auto g = static_cast<std::size_t>(sub) % groups;
    sums[g] += y.row(sub).squaredNorm() / static_cast<double>(y.cols());
    counts[g] += 1.0;
  }
  std::vector<double> powers(groups);
  for (std::size_t g = 0; g < groups; ++g) powers[g] = sums[g] / counts[g];
  rep.angles_deg = {cand[elect(cand, powers, rep)]};
  rep.time_blocks = stream.blocks_used() - start;
  rep.flops = complexity_flops(HadMethod::Fast, k, m, stream.scenario().snapshots, k * m);
  return rep;
}

const char* to_string(HadMethod method) noexcept {
  return method == HadMethod::Original ? "original" : "fast";
}

double complexity_flops(HadMethod method, int subarrays, int per_subarray, int snapshots,
                        int elements) {
  check_dims(subarrays, per_subarray);
  if (elements != subarrays * per_subarray) throw Error(ErrorCode::InvalidArgument, "N must equal K*M");
  if (snapshots < 1) throw Error(ErrorCode::InvalidArgument, "L must be >= 1");
  const double k = subarrays, l = snapshots, n = elements;
  const double tail = method == HadMethod::Original ? per_subarray * n : n;
  return k * k * l + 8.0 * (k - 1.0) + l * ((2.0 * k - 2.0) * k + tail);
}

CrlbReport crlb_hybrid(int subarrays, int per_subarray, double snr_db, int snapshots,
                       double theta_deg) {
  auto rep = crlb_numeric_fim(ArrayGeometry::had(subarrays, per_subarray),
                              EmitterScenario::single(theta_deg, snr_db, snapshots, 0),
                              FimModel::hybrid(hybrid_combiner(zero_phases(subarrays, per_subarray))));
  rep.parameters["K"] = subarrays;
  rep.parameters["M"] = per_subarray;
  return rep;
}

}  // namespace doafoundry
