// SPDX-License-Identifier: Apache-2.0
//
// Array geometries, the far-field narrowband snapshot model and the sample
// covariance. Conventions used throughout the library:
//
//  * element positions are in units of half a wavelength;
//  * element m of the steering vector is exp(+j*pi*d_m*sin(theta)), so a
//    positive angle advances the phase with increasing element index;
//  * angles are degrees at every public interface;
//  * noise is circular complex Gaussian with unit variance per element, and a
//    source with SNR s dB has power 10^(s/10).
#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace doafoundry {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) noexcept { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) noexcept { return rad * 180.0 / kPi; }
double db2lin(double db) noexcept;

/// Uniform linear array; `spacing` is the inter-element distance in half
/// wavelengths (1 for a standard half-wavelength ULA).
struct UlaLayout {
  int elements = 0;
  double spacing = 1.0;
};

/// Sub-connected hybrid array: `subarrays` RF chains, each fed by
/// `per_subarray` contiguous half-wavelength-spaced antennas.
struct HadLayout {
  int subarrays = 0;
  int per_subarray = 0;
};

struct CoPrimeLayout {
  int p = 0;
  int q = 0;
};

/// Widely separated subarrays, each a local half-wavelength ULA. Origins are
/// metric (meters) because the cluster is used for bearing localization.
struct SubarrayClusterLayout {
  std::vector<Eigen::Vector3d> origins_m;
  int elements_per_subarray = 0;
};

using GeometryKind =
    std::variant<UlaLayout, HadLayout, CoPrimeLayout, SubarrayClusterLayout>;

class ArrayGeometry {
 public:
  static ArrayGeometry ula(int elements, double spacing = 1.0);
  static ArrayGeometry had(int subarrays, int per_subarray);
  static ArrayGeometry coprime(int p, int q, std::vector<double> positions);
  static ArrayGeometry subarray_cluster(std::vector<Eigen::Vector3d> origins_m,
                                        int elements_per_subarray);

  int size() const noexcept { return static_cast<int>(positions_.size()); }
  const std::vector<double>& positions() const noexcept { return positions_; }
  const GeometryKind& kind() const noexcept { return kind_; }

  /// True when a single 1D manifold exists (every kind except clusters).
  bool is_linear() const noexcept;
  /// True for ULA/HAD layouts, i.e. a Vandermonde manifold.
  bool is_uniform() const noexcept;
  /// Spacing of a uniform layout in half wavelengths.
  double uniform_spacing() const;

  std::string describe() const;

 private:
  ArrayGeometry(std::vector<double> positions, GeometryKind kind);

  std::vector<double> positions_;
  GeometryKind kind_;
};

enum class SignalModel { GaussianIID, ConstantModulusRandomPhase };

const char* to_string(SignalModel model) noexcept;

struct EmitterScenario {
  std::vector<double> angles_deg;
  std::vector<double> snr_db;  // one entry per source
  int snapshots = 1;
  SignalModel signal_model = SignalModel::GaussianIID;
  std::uint64_t seed = 0;
  /// Switching this off yields the noiseless (infinite-SNR) observation.
  bool noise_enabled = true;

  static EmitterScenario single(double angle_deg, double snr_db, int snapshots,
                                std::uint64_t seed);
  static EmitterScenario equal_power(std::vector<double> angles_deg, double snr_db,
                                     int snapshots, std::uint64_t seed);

  /// Throws InvalidArgument on a broken invariant.
  void validate() const;
};

struct SnapshotMatrix {
  CMatrix data;  // elements x snapshots
  ArrayGeometry geometry;
};

/// Hermitian sample covariance with its eigen-decomposition, eigenvalues in
/// descending order and eigenvectors in matching columns.
class CovarianceEstimate {
 public:
  /// Symmetrizes `matrix` and decomposes it. `geometry` defaults to a ULA of
  /// matching size when omitted.
  CovarianceEstimate(CMatrix matrix, int snapshots_used);
  CovarianceEstimate(CMatrix matrix, int snapshots_used, ArrayGeometry geometry);

  const CMatrix& matrix() const noexcept { return matrix_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const CMatrix& eigenvectors() const noexcept { return eigenvectors_; }
  int snapshots_used() const noexcept { return snapshots_used_; }
  const ArrayGeometry& geometry() const noexcept { return geometry_; }
  int size() const noexcept { return static_cast<int>(matrix_.rows()); }

  /// Eigenvectors of the `n_sources` largest eigenvalues.
  CMatrix signal_subspace(int n_sources) const;
  /// Eigenvectors of the N - n_sources smallest eigenvalues.
  CMatrix noise_subspace(int n_sources) const;

  CovarianceEstimate scaled(double factor) const;

 private:
  CMatrix matrix_;
  Eigen::VectorXd eigenvalues_;
  CMatrix eigenvectors_;
  int snapshots_used_;
  ArrayGeometry geometry_;
};

CVector steering_vector(const ArrayGeometry& geometry, double theta_deg);
/// Columns are steering vectors for each angle.
CMatrix steering_matrix(const ArrayGeometry& geometry, const std::vector<double>& angles_deg);

/// Draws sources through the manifold plus unit-variance noise. Deterministic
/// for a given scenario seed. For a subarray cluster each subarray observes
/// the common waveform through its local ULA manifold with independent noise;
/// rows are stacked subarray by subarray.
SnapshotMatrix synthesize_snapshots(const EmitterScenario& scenario,
                                    const ArrayGeometry& geometry);

/// R = X X^H / L.
CovarianceEstimate sample_covariance(const SnapshotMatrix& x);

/// Model covariance sum_k p_k a_k a_k^H + I (identity omitted when the
/// scenario is noiseless).
CMatrix model_covariance(const EmitterScenario& scenario, const ArrayGeometry& geometry);

}  // namespace doafoundry
