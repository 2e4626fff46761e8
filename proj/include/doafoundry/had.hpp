// SPDX-License-Identifier: Apache-2.0
//
// Sub-connected hybrid analog-digital (HAD) arrays. Subarray k drives one RF
// chain from antennas kM .. kM+M-1; the analog stage applies unit-modulus
// phase shifts, so the digital side sees a K-element array with spacing M
// and an M-fold phase ambiguity.
#pragma once

#include <cstdint>
#include <vector>

#include "doafoundry/bounds.hpp"
#include "doafoundry/core.hpp"
#include "doafoundry/estimators.hpp"

namespace doafoundry {

/// Phase-shifter settings for one time block, K x M radians.
using PhaseSet = Eigen::MatrixXd;

struct HadConfig {
  int subarrays = 0;     // K
  int per_subarray = 0;  // M
  std::vector<PhaseSet> phase_sets;

  int elements() const noexcept { return subarrays * per_subarray; }
  ArrayGeometry geometry() const;
  void validate() const;
};

/// Phases phi_{k,m} = pi m sin(theta) aligning every subarray to theta.
PhaseSet steering_phases(int subarrays, int per_subarray, double theta_deg);
PhaseSet zero_phases(int subarrays, int per_subarray);

/// Combiner W (N x K) with W(kM+m, k) = exp(j phi_{k,m}) / M; the RF chain
/// outputs are y = W^H x.
CMatrix hybrid_combiner(const PhaseSet& phases);

/// y_k = (1/M) sum_m exp(-j phi_{k,m}) x_{k,m} for the stored phase set of `block`.
CMatrix analog_combine(const SnapshotMatrix& x, const HadConfig& cfg, std::size_t block);
CMatrix analog_combine(const CMatrix& x, const PhaseSet& phases);

/// Hands out a fresh snapshot block per time slot. The block seed depends only
/// on the scenario seed and the block index, so two streams built from the
/// same scenario replay identical blocks.
class EmitterStream {
 public:
  EmitterStream(EmitterScenario scenario, int subarrays, int per_subarray);

  SnapshotMatrix next_block();
  int blocks_used() const noexcept { return blocks_used_; }
  const EmitterScenario& scenario() const noexcept { return scenario_; }
  int subarrays() const noexcept { return subarrays_; }
  int per_subarray() const noexcept { return per_subarray_; }

 private:
  EmitterScenario scenario_;
  ArrayGeometry geometry_;
  int subarrays_;
  int per_subarray_;
  int blocks_used_ = 0;
};

struct AmbiguityCandidateSet {
  double base_estimate_deg = 0.0;
  std::vector<double> candidates_deg;  // ascending
};

/// Angles whose sines are sin(base) + 2q/M for integer q, inside (-1, 1).
AmbiguityCandidateSet ambiguity_candidates(double base_estimate_deg, int per_subarray);

/// Analog sweep over a coarse grid (one block per angle) followed by a digital
/// search within one coarse step of the winner on a fresh block.
EstimateReport hdapa_estimate(EmitterStream& stream, double coarse_step_deg, double fine_step_deg);

/// Digital search on an unsteered block first, then one analog block per
/// ambiguity candidate.
EstimateReport dapa_estimate(EmitterStream& stream, double fine_step_deg);

/// Root-MUSIC on the K-dim unsteered block, digital election of the root with
/// the largest beam power, then one analog block per candidate.
EstimateReport root_music_hdapa(EmitterStream& stream);

/// Same first block as root_music_hdapa; the second block steers subarray k to
/// candidate k mod M and the group with the largest mean power wins.
EstimateReport fast_ambiguity_elimination(EmitterStream& stream);

enum class HadMethod { Original, Fast };

const char* to_string(HadMethod method) noexcept;

/// K^2 L + 8(K-1) + L((2K-2)K + c), c = MN for the original method and N for
/// the fast one.
double complexity_flops(HadMethod method, int subarrays, int per_subarray, int snapshots,
                        int elements);

/// Bound for a single source observed through the unsteered combiner.
CrlbReport crlb_hybrid(int subarrays, int per_subarray, double snr_db, int snapshots,
                       double theta_deg);

}  // namespace doafoundry
