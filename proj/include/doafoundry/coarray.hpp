// SPDX-License-Identifier: Apache-2.0
//
// Co-prime arrays and the difference coarray.
#pragma once

#include <vector>

#include "doafoundry/core.hpp"
#include "doafoundry/estimators.hpp"

namespace doafoundry {

struct CoarrayStructure {
  std::vector<int> lags;     // ascending, symmetric about 0
  std::vector<int> weights;  // multiplicity of each lag
  int contiguous_v = 0;      // lags -V..V are all present

  int weight(int lag) const;
};

/// {0, q, ..., (p-1)q} united with {0, p, ..., (2q-1)p}; p + 2q - 1 sensors.
ArrayGeometry coprime_positions(int p, int q);

/// Pairwise differences d_i - d_j with multiplicities. Positions must be integers.
CoarrayStructure difference_coarray(const ArrayGeometry& geometry);

/// Lag-averaged autocorrelation r(-V..V), then the (V+1)x(V+1) smoothed
/// covariance sum_i z_i z_i^H over the V+1 length-(V+1) subvectors of r. This
/// equals T^2 for the Toeplitz matrix T(a,b) = r(a-b).
CMatrix coarray_covariance(const CovarianceEstimate& r, const CoarrayStructure& structure);

/// MUSIC on the smoothed virtual-ULA covariance.
EstimateReport coarray_music(const SnapshotMatrix& x, int n_sources,
                             const std::vector<double>& grid = make_grid());

}  // namespace doafoundry
