// SPDX-License-Identifier: Apache-2.0
//
// 3D emitter localization from per-subarray bearings. Each bearing defines
// two planes through its subarray; the position minimizes the sum of
// absolute point-to-plane distances.
//
// Angle convention: azimuth is measured about +z from +x, elevation from the
// horizontal plane, both in degrees.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

namespace doafoundry {

struct BearingMeasurement {
  Eigen::Vector3d subarray_origin = Eigen::Vector3d::Zero();
  double azimuth_deg = 0.0;    // (-180, 180]
  double elevation_deg = 0.0;  // (-90, 90)
  double angle_variance_deg2 = 0.0;
};

enum class PlaneKind { Azimuth, Elevation };

struct PlaneSet {
  Eigen::MatrixXd a;  // R x 3, unit-norm rows
  Eigen::VectorXd b;  // meters
  std::vector<std::pair<int, PlaneKind>> provenance;
};

enum class L1Solver { LinearProgram, Irls };

const char* to_string(L1Solver solver) noexcept;

struct PositionEstimate {
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  double objective = 0.0;
  L1Solver solver = L1Solver::LinearProgram;
  int iterations = 0;
};

/// Exact azimuth/elevation of `target` seen from `origin`.
std::pair<double, double> bearing_deg(const Eigen::Vector3d& origin, const Eigen::Vector3d& target);

/// Geometric bearings plus independent N(0, sigma^2) errors on each angle.
std::vector<BearingMeasurement> simulate_bearings(const Eigen::Vector3d& true_position,
                                                  const std::vector<Eigen::Vector3d>& origins,
                                                  double angle_sigma_deg, std::uint64_t seed);

/// Per measurement: the vertical plane through the azimuth direction
/// (normal (-sin az, cos az, 0)) and the plane through the ray whose normal
/// (-sin el cos az, -sin el sin az, cos el) is tilted in elevation.
PlaneSet build_planes(const std::vector<BearingMeasurement>& measurements);

/// Minimizes ||A u - b||_1. The LP path breaks ties by taking, among optimal
/// points, the one closest in L1 to the least-squares solution. The IRLS path
/// uses weights 1/max(|r|, 1e-9) and finishes by snapping to the three rows
/// with the smallest residuals when that does not increase the objective.
PositionEstimate solve_l1(const PlaneSet& planes, L1Solver solver = L1Solver::LinearProgram);

/// Generic dense form used for both the 3D planes and 2D line sets.
Eigen::VectorXd l1_minimize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            L1Solver solver = L1Solver::LinearProgram, int* iterations = nullptr);

struct Line2D {
  Eigen::Vector2d point = Eigen::Vector2d::Zero();
  double angle_deg = 0.0;  // direction measured from +x
};

/// Incenter of the triangle cut out by three lines.
Eigen::Vector2d incenter_2d(const Line2D& l1, const Line2D& l2, const Line2D& l3);

/// Minimizer of the summed point-to-line distances.
Eigen::Vector2d l1_point_2d(const std::vector<Line2D>& lines);

double rmse(const std::vector<Eigen::Vector3d>& estimates, const Eigen::Vector3d& truth);
double rmse(const std::vector<double>& estimates, double truth);

struct PositionBound {
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // m^2
  double trace = 0.0;
};

/// Inverse Fisher information for independent Gaussian az/el errors of the
/// given variance, with the bearing Jacobian from central differences (1e-5 m).
PositionBound crlb_position(const std::vector<Eigen::Vector3d>& origins,
                            const Eigen::Vector3d& true_position, double angle_variance_deg2);

/// Three subarrays 1 m apart along y on a 10 m mast; target at 1.5 m height
/// `distance_m` away along +x.
struct MastScenario {
  std::vector<Eigen::Vector3d> origins;
  Eigen::Vector3d target;
};

MastScenario mast_scenario(double distance_m, double spacing_m = 1.0, double mast_height_m = 10.0,
                           double target_height_m = 1.5);

/// Monte Carlo position RMSE over `trials` independent bearing draws.
double localization_rmse(const std::vector<Eigen::Vector3d>& origins, const Eigen::Vector3d& target,
                         double angle_variance_deg2, int trials, std::uint64_t seed,
                         L1Solver solver = L1Solver::LinearProgram);

}  // namespace doafoundry
