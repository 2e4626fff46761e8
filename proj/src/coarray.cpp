// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/coarray.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doafoundry/error.hpp"

namespace doafoundry {

namespace {

std::vector<int> integer_positions(const ArrayGeometry& geometry) {
  std::vector<int> out;
  for (double d : geometry.positions()) {
    const double r = std::round(d);
    if (std::abs(d - r) > 1e-9) {
      throw Error(ErrorCode::InvalidGeometry, "difference coarray needs integer positions");
    }
    out.push_back(static_cast<int>(r));
  }
  return out;
}

}  // namespace

int CoarrayStructure::weight(int lag) const {
  const auto it = std::lower_bound(lags.begin(), lags.end(), lag);
  return it != lags.end() && *it == lag ? weights[static_cast<std::size_t>(it - lags.begin())] : 0;
}

ArrayGeometry coprime_positions(int p, int q) {
  if (p < 1 || q < 1 || p >= q) throw Error(ErrorCode::InvalidGeometry, "co-prime pair needs 0 < p < q");
  if (std::gcd(p, q) != 1) {
    throw Error(ErrorCode::InvalidGeometry,
                "p=" + std::to_string(p) + " and q=" + std::to_string(q) + " are not co-prime");
  }
  std::set<int> pos;
  for (int i = 0; i < p; ++i) pos.insert(i * q);
  for (int i = 0; i < 2 * q; ++i) pos.insert(i * p);
  return ArrayGeometry::coprime(p, q, std::vector<double>(pos.begin(), pos.end()));
}

CoarrayStructure difference_coarray(const ArrayGeometry& geometry) {
  const auto pos = integer_positions(geometry);
  std::map<int, int> counts;
  for (int a : pos) {
    for (int b : pos) ++counts[a - b];
  }
  CoarrayStructure s;
  for (const auto& [lag, w] : counts) {
    s.lags.push_back(lag);
    s.weights.push_back(w);
  }
  while (counts.count(s.contiguous_v + 1) != 0) ++s.contiguous_v;
  return s;
}

CMatrix coarray_covariance(const CovarianceEstimate& r, const CoarrayStructure& structure) {
  const int v = structure.contiguous_v;
  if (v < 1) throw Error(ErrorCode::InsufficientCoarray, "contiguous coarray segment shorter than 3 lags");
  const auto pos = integer_positions(r.geometry());
  std::vector<std::complex<double>> acc(static_cast<std::size_t>(2 * v + 1), 0.0);
  std::vector<int> hits(acc.size(), 0);
  const CMatrix& m = r.matrix();
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = 0; j < pos.size(); ++j) {
      const int lag = pos[i] - pos[j];
      if (std::abs(lag) > v) continue;
      const auto k = static_cast<std::size_t>(lag + v);
      acc[k] += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      ++hits[k];
    }
  }
  for (std::size_t k = 0; k < acc.size(); ++k) {
    if (hits[k] == 0) throw Error(ErrorCode::InsufficientCoarray, "structure does not match the covariance geometry");
    acc[k] /= static_cast<double>(hits[k]);
  }
  CMatrix toeplitz(v + 1, v + 1);
  for (int a = 0; a <= v; ++a) {
    for (int b = 0; b <= v; ++b) toeplitz(a, b) = acc[static_cast<std::size_t>(a - b + v)];
  }
  return toeplitz * toeplitz.adjoint();
}

EstimateReport coarray_music(const SnapshotMatrix& x, int n_sources, const std::vector<double>& grid) {
  const auto structure = difference_coarray(x.geometry);
  const int v = structure.contiguous_v;
  if (n_sources < 1 || n_sources > v) {
    throw Error(ErrorCode::OverCapacity, std::to_string(n_sources) + " sources exceed the coarray capacity V=" +
                                             std::to_string(v));
  }
  const auto r = sample_covariance(x);
  const CovarianceEstimate smoothed(coarray_covariance(r, structure), r.snapshots_used(),
                                    ArrayGeometry::ula(v + 1));
  auto rep = music_estimate(smoothed, n_sources, grid);
  rep.method = "coarray-music";
  rep.spectrum->method = "coarray-music";
  rep.diagnostics["physical_sensors"] = x.geometry.size();
  rep.diagnostics["coarray_v"] = v;
  return rep;
}

}  // namespace doafoundry
