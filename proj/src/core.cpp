// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/core.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "doafoundry/error.hpp"
#include "doafoundry/random.hpp"

namespace doafoundry {

double db2lin(double db) noexcept { return std::pow(10.0, db / 10.0); }

ArrayGeometry::ArrayGeometry(std::vector<double> positions, GeometryKind kind)
    : positions_(std::move(positions)), kind_(std::move(kind)) {}

ArrayGeometry ArrayGeometry::ula(int elements, double spacing) {
  if (elements < 1) throw Error(ErrorCode::InvalidGeometry, "ULA needs at least one element");
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidGeometry, "ULA spacing must be positive");
  std::vector<double> pos(elements);
  for (int m = 0; m < elements; ++m) pos[m] = m * spacing;
  return ArrayGeometry(std::move(pos), UlaLayout{elements, spacing});
}

ArrayGeometry ArrayGeometry::had(int subarrays, int per_subarray) {
  if (subarrays < 1 || per_subarray < 1) {
    throw Error(ErrorCode::InvalidGeometry, "HAD layout needs K >= 1 and M >= 1");
  }
  const int n = subarrays * per_subarray;
  std::vector<double> pos(n);
  for (int m = 0; m < n; ++m) pos[m] = m;
  return ArrayGeometry(std::move(pos), HadLayout{subarrays, per_subarray});
}

ArrayGeometry ArrayGeometry::coprime(int p, int q, std::vector<double> positions) {
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (!(positions[i] > positions[i - 1])) {
      throw Error(ErrorCode::InvalidGeometry, "co-prime positions must be strictly increasing");
    }
  }
  return ArrayGeometry(std::move(positions), CoPrimeLayout{p, q});
}

ArrayGeometry ArrayGeometry::subarray_cluster(std::vector<Eigen::Vector3d> origins_m,
                                              int elements_per_subarray) {
  if (origins_m.empty() || elements_per_subarray < 1) {
    throw Error(ErrorCode::InvalidGeometry, "cluster needs subarrays with >= 1 element");
  }
  std::vector<double> pos;
  pos.reserve(origins_m.size() * elements_per_subarray);
  for (std::size_t s = 0; s < origins_m.size(); ++s) {
    for (int m = 0; m < elements_per_subarray; ++m) pos.push_back(m);
  }
  return ArrayGeometry(std::move(pos),
                       SubarrayClusterLayout{std::move(origins_m), elements_per_subarray});
}

bool ArrayGeometry::is_linear() const noexcept {
  return !std::holds_alternative<SubarrayClusterLayout>(kind_);
}

bool ArrayGeometry::is_uniform() const noexcept {
  return std::holds_alternative<UlaLayout>(kind_) || std::holds_alternative<HadLayout>(kind_);
}

double ArrayGeometry::uniform_spacing() const {
  if (const auto* ula = std::get_if<UlaLayout>(&kind_)) return ula->spacing;
  if (std::holds_alternative<HadLayout>(kind_)) return 1.0;
  throw Error(ErrorCode::UnsupportedGeometry, "geometry is not uniformly spaced: " + describe());
}

std::string ArrayGeometry::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, UlaLayout>) {
          os << "ULA(N=" << k.elements << ", d=" << k.spacing << ")";
        } else if constexpr (std::is_same_v<T, HadLayout>) {
          os << "HAD(K=" << k.subarrays << ", M=" << k.per_subarray << ")";
        } else if constexpr (std::is_same_v<T, CoPrimeLayout>) {
          os << "CoPrime(p=" << k.p << ", q=" << k.q << ", N=" << positions_.size() << ")";
        } else {
          os << "SubarrayCluster(S=" << k.origins_m.size() << ", n=" << k.elements_per_subarray
             << ")";
        }
      },
      kind_);
  return os.str();
}

const char* to_string(SignalModel model) noexcept {
  switch (model) {
    case SignalModel::GaussianIID: return "gaussian-iid";
    case SignalModel::ConstantModulusRandomPhase: return "constant-modulus";
  }
  return "unknown";
}

EmitterScenario EmitterScenario::single(double angle_deg, double snr_db, int snapshots,
                                        std::uint64_t seed) {
  return equal_power({angle_deg}, snr_db, snapshots, seed);
}

EmitterScenario EmitterScenario::equal_power(std::vector<double> angles_deg, double snr_db,
                                             int snapshots, std::uint64_t seed) {
  EmitterScenario s;
  s.snr_db.assign(angles_deg.size(), snr_db);
  s.angles_deg = std::move(angles_deg);
  s.snapshots = snapshots;
  s.seed = seed;
  return s;
}

void EmitterScenario::validate() const {
  if (snapshots < 1) throw Error(ErrorCode::InvalidArgument, "snapshot count must be >= 1");
  if (snr_db.size() != angles_deg.size()) {
    throw Error(ErrorCode::InvalidArgument, "one SNR per source is required");
  }
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    const double a = angles_deg[i];
    if (!(a > -90.0 && a < 90.0)) {
      throw Error(ErrorCode::InvalidArgument, "source angle outside (-90, 90): " + std::to_string(a));
    }
    if (!std::isfinite(snr_db[i])) throw Error(ErrorCode::InvalidArgument, "SNR must be finite");
    for (std::size_t j = 0; j < i; ++j) {
      if (angles_deg[j] == a) throw Error(ErrorCode::InvalidArgument, "source angles must differ");
    }
  }
}

CovarianceEstimate::CovarianceEstimate(CMatrix matrix, int snapshots_used)
    : CovarianceEstimate(matrix, snapshots_used, ArrayGeometry::ula(static_cast<int>(matrix.rows()))) {}

CovarianceEstimate::CovarianceEstimate(CMatrix matrix, int snapshots_used, ArrayGeometry geometry)
    : snapshots_used_(snapshots_used), geometry_(std::move(geometry)) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "covariance must be square and non-empty");
  }
  if (matrix.rows() != geometry_.size()) {
    throw Error(ErrorCode::InvalidArgument, "covariance size does not match geometry");
  }
  matrix_ = (matrix + matrix.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(matrix_);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::Numerical, "eigen-decomposition did not converge");
  }
  // Eigen orders ascending.
  eigenvalues_ = solver.eigenvalues().reverse();
  eigenvectors_ = solver.eigenvectors().rowwise().reverse();
}

CMatrix CovarianceEstimate::signal_subspace(int n_sources) const {
  return eigenvectors_.leftCols(n_sources);
}

CMatrix CovarianceEstimate::noise_subspace(int n_sources) const {
  return eigenvectors_.rightCols(size() - n_sources);
}

CovarianceEstimate CovarianceEstimate::scaled(double factor) const {
  return CovarianceEstimate(matrix_ * factor, snapshots_used_, geometry_);
}

namespace {

CVector ula_manifold(const std::vector<double>& positions, double theta_deg) {
  const double u = kPi * std::sin(deg2rad(theta_deg));
  CVector a(static_cast<Eigen::Index>(positions.size()));
  for (std::size_t m = 0; m < positions.size(); ++m) {
    a(static_cast<Eigen::Index>(m)) = std::polar(1.0, u * positions[m]);
  }
  return a;
}

}  // namespace

CVector steering_vector(const ArrayGeometry& geometry, double theta_deg) {
  if (!geometry.is_linear()) {
    throw Error(ErrorCode::UnsupportedGeometry,
                "no single 1D manifold for " + geometry.describe());
  }
  if (!(theta_deg >= -90.0 && theta_deg <= 90.0)) {
    throw Error(ErrorCode::InvalidArgument, "angle outside [-90, 90]");
  }
  return ula_manifold(geometry.positions(), theta_deg);
}

CMatrix steering_matrix(const ArrayGeometry& geometry, const std::vector<double>& angles_deg) {
  CMatrix a(geometry.size(), static_cast<Eigen::Index>(angles_deg.size()));
  for (std::size_t k = 0; k < angles_deg.size(); ++k) {
    a.col(static_cast<Eigen::Index>(k)) = steering_vector(geometry, angles_deg[k]);
  }
  return a;
}

SnapshotMatrix synthesize_snapshots(const EmitterScenario& scenario,
                                    const ArrayGeometry& geometry) {
  scenario.validate();
  const auto n_src = static_cast<Eigen::Index>(scenario.angles_deg.size());
  const int l = scenario.snapshots;
  Rng rng(scenario.seed);

  // Unit-power waveforms first, scaled afterwards, so that runs differing only
  // in SNR share the same random draws.
  CMatrix s(n_src, l);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  for (Eigen::Index k = 0; k < n_src; ++k) {
    const double amp = std::sqrt(db2lin(scenario.snr_db[static_cast<std::size_t>(k)]));
    for (int t = 0; t < l; ++t) {
      const std::complex<double> unit = scenario.signal_model == SignalModel::GaussianIID
                                            ? complex_normal(rng)
                                            : std::polar(1.0, phase(rng));
      s(k, t) = amp * unit;
    }
  }

  CMatrix manifold;
  if (const auto* cluster = std::get_if<SubarrayClusterLayout>(&geometry.kind())) {
    const int n = cluster->elements_per_subarray;
    const auto local = ArrayGeometry::ula(n);
    manifold.resize(geometry.size(), n_src);
    for (std::size_t sub = 0; sub < cluster->origins_m.size(); ++sub) {
      manifold.middleRows(static_cast<Eigen::Index>(sub) * n, n) =
          steering_matrix(local, scenario.angles_deg);
    }
  } else {
    manifold = steering_matrix(geometry, scenario.angles_deg);
  }

  CMatrix x = manifold * s;
  if (scenario.noise_enabled) {
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
      for (Eigen::Index m = 0; m < x.rows(); ++m) x(m, t) += complex_normal(rng);
    }
  }
  return SnapshotMatrix{std::move(x), geometry};
}

CovarianceEstimate sample_covariance(const SnapshotMatrix& x) {
  const auto l = x.data.cols();
  if (l < 1) throw Error(ErrorCode::InvalidArgument, "need at least one snapshot");
  CMatrix r = x.data * x.data.adjoint() / static_cast<double>(l);
  return CovarianceEstimate(std::move(r), static_cast<int>(l), x.geometry);
}

CMatrix model_covariance(const EmitterScenario& scenario, const ArrayGeometry& geometry) {
  const CMatrix a = steering_matrix(geometry, scenario.angles_deg);
  CMatrix r = CMatrix::Zero(geometry.size(), geometry.size());
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    r += db2lin(scenario.snr_db[static_cast<std::size_t>(k)]) * a.col(k) * a.col(k).adjoint();
  }
  if (scenario.noise_enabled) r += CMatrix::Identity(geometry.size(), geometry.size());
  return r;
}

}  // namespace doafoundry
