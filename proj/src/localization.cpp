// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/localization.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doafoundry/core.hpp"
#include "doafoundry/error.hpp"
#include "doafoundry/lp.hpp"
#include "doafoundry/random.hpp"

namespace doafoundry {

namespace {

constexpr double kIrlsEpsilon = 1e-9;
constexpr double kIrlsTolerance = 1e-10;
constexpr int kIrlsMaxIterations = 2000;
constexpr std::uint64_t kBearingStream = 0x4245'4152ULL;

double wrap_deg(double a) {
  double w = std::remainder(a, 360.0);
  if (w <= -180.0) w += 360.0;
  return w;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  return a.colPivHouseholderQr().solve(b);
}

void check_rank(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() < a.cols() || sv(sv.size() - 1) <= 1e-9 * std::max(1.0, sv(0))) {
    throw Error(ErrorCode::Unidentifiable, "plane normals do not span the position space");
  }
}

Eigen::VectorXd l1_linear_program(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int* iterations) {
  const Eigen::Index r = a.rows(), d = a.cols();
  // x = [u+, u-, e+, e-]; A u - b = e+ - e-.
  Eigen::MatrixXd eq(r, 2 * d + 2 * r);
  eq << a, -a, -Eigen::MatrixXd::Identity(r, r), Eigen::MatrixXd::Identity(r, r);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(2 * d + 2 * r);
  cost.tail(2 * r).setOnes();
  const auto first = simplex_minimize(cost, eq, b);

  // Among optimal points, the one closest in L1 to the least-squares seed.
  // x = [u+, u-, e+, e-, t+, t-, s]; u - seed = t+ - t-; sum e + s = f* + slack.
  const Eigen::VectorXd seed = least_squares(a, b);
  const double slack = 1e-9 * std::max(1.0, first.objective);
  const Eigen::Index n = 4 * d + 2 * r + 1;
  Eigen::MatrixXd eq2 = Eigen::MatrixXd::Zero(r + d + 1, n);
  Eigen::VectorXd rhs(r + d + 1);
  eq2.topLeftCorner(r, 2 * d + 2 * r) = eq;
  rhs.head(r) = b;
  eq2.block(r, 0, d, d).setIdentity();
  eq2.block(r, d, d, d) = -Eigen::MatrixXd::Identity(d, d);
  eq2.block(r, 2 * d + 2 * r, d, d) = -Eigen::MatrixXd::Identity(d, d);
  eq2.block(r, 3 * d + 2 * r, d, d).setIdentity();
  rhs.segment(r, d) = seed;
  eq2.block(r + d, 2 * d, 1, 2 * r).setOnes();
  eq2(r + d, n - 1) = 1.0;
  rhs(r + d) = first.objective + slack;
  Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(n);
  cost2.segment(2 * d + 2 * r, 2 * d).setOnes();
  const auto second = simplex_minimize(cost2, eq2, rhs);
  if (iterations) *iterations = first.iterations + second.iterations;
  return second.x.head(d) - second.x.segment(d, d);
}

Eigen::VectorXd l1_irls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int* iterations) {
  const Eigen::Index d = a.cols();
  Eigen::VectorXd u = least_squares(a, b);
  auto objective = [&](const Eigen::VectorXd& x) { return (a * x - b).lpNorm<1>(); };
  double obj = objective(u);
  int it = 0;
  bool converged = false;
  while (it < kIrlsMaxIterations) {
    ++it;
    const Eigen::VectorXd w = (a * u - b).cwiseAbs().cwiseMax(kIrlsEpsilon).cwiseInverse();
    const Eigen::MatrixXd normal = a.transpose() * w.asDiagonal() * a;
    const Eigen::VectorXd next = normal.ldlt().solve(a.transpose() * w.asDiagonal() * b);
    const double next_obj = objective(next);
    const double change = std::abs(obj - next_obj);
    if (next_obj <= obj) u = next;
    obj = std::min(obj, next_obj);
    if (change < kIrlsTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::SolverFailed, "IRLS did not converge; best objective " + std::to_string(obj));
  }
  // Snap onto the vertex spanned by the rows with the smallest residuals.
  const Eigen::VectorXd res = (a * u - b).cwiseAbs();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(a.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return res(i) < res(j); });
  Eigen::MatrixXd sub(d, d);
  Eigen::VectorXd rhs(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    sub.row(k) = a.row(order[static_cast<std::size_t>(k)]);
    rhs(k) = b(order[static_cast<std::size_t>(k)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
  if (lu.isInvertible()) {
    const Eigen::VectorXd snapped = lu.solve(rhs);
    if (objective(snapped) <= obj + 1e-12) u = snapped;
  }
  if (iterations) *iterations = it;
  return u;
}

}  // namespace

const char* to_string(L1Solver solver) noexcept {
  return solver == L1Solver::LinearProgram ? "lp" : "irls";
}

std::pair<double, double> bearing_deg(const Eigen::Vector3d& origin, const Eigen::Vector3d& target) {
  const Eigen::Vector3d d = target - origin;
  if (d.norm() == 0.0) throw Error(ErrorCode::InvalidArgument, "target coincides with a subarray origin");
  return {rad2deg(std::atan2(d.y(), d.x())), rad2deg(std::atan2(d.z(), std::hypot(d.x(), d.y())))};
}

std::vector<BearingMeasurement> simulate_bearings(const Eigen::Vector3d& true_position,
                                                  const std::vector<Eigen::Vector3d>& origins,
                                                  double angle_sigma_deg, std::uint64_t seed) {
  if (!(angle_sigma_deg >= 0.0)) throw Error(ErrorCode::InvalidArgument, "angle sigma must be >= 0");
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<BearingMeasurement> out;
  for (const auto& o : origins) {
    auto [az, el] = bearing_deg(o, true_position);
    BearingMeasurement m;
    m.subarray_origin = o;
    m.azimuth_deg = wrap_deg(az + angle_sigma_deg * noise(rng));
    m.elevation_deg = el + angle_sigma_deg * noise(rng);
    m.angle_variance_deg2 = angle_sigma_deg * angle_sigma_deg;
    out.push_back(m);
  }
  return out;
}

PlaneSet build_planes(const std::vector<BearingMeasurement>& measurements) {
  if (measurements.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two bearings");
  const auto rows = static_cast<Eigen::Index>(2 * measurements.size());
  PlaneSet p;
  p.a.resize(rows, 3);
  p.b.resize(rows);
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    const auto& m = measurements[i];
    if (std::abs(m.elevation_deg) >= 90.0) {
      throw Error(ErrorCode::DegeneratePlane, "elevation of +-90 degrees leaves the azimuth plane undefined");
    }
    const double az = deg2rad(m.azimuth_deg), el = deg2rad(m.elevation_deg);
    const Eigen::Vector3d n1(-std::sin(az), std::cos(az), 0.0);
    const Eigen::Vector3d n2(-std::sin(el) * std::cos(az), -std::sin(el) * std::sin(az), std::cos(el));
    const auto r = static_cast<Eigen::Index>(2 * i);
    p.a.row(r) = n1.normalized().transpose();
    p.a.row(r + 1) = n2.normalized().transpose();
    p.b(r) = p.a.row(r).dot(m.subarray_origin);
    p.b(r + 1) = p.a.row(r + 1).dot(m.subarray_origin);
    p.provenance.emplace_back(static_cast<int>(i), PlaneKind::Azimuth);
    p.provenance.emplace_back(static_cast<int>(i), PlaneKind::Elevation);
  }
  return p;
}

Eigen::VectorXd l1_minimize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, L1Solver solver,
                            int* iterations) {
  if (a.rows() != b.size()) throw Error(ErrorCode::InvalidArgument, "A and b disagree in size");
  check_rank(a);
  return solver == L1Solver::LinearProgram ? l1_linear_program(a, b, iterations)
                                           : l1_irls(a, b, iterations);
}

PositionEstimate solve_l1(const PlaneSet& planes, L1Solver solver) {
  PositionEstimate est;
  est.solver = solver;
  est.u = l1_minimize(planes.a, planes.b, solver, &est.iterations);
  est.objective = (planes.a * est.u - planes.b).lpNorm<1>();
  return est;
}

Eigen::Vector2d incenter_2d(const Line2D& l1, const Line2D& l2, const Line2D& l3) {
  auto intersect = [](const Line2D& p, const Line2D& q) {
    const Eigen::Vector2d dp(std::cos(deg2rad(p.angle_deg)), std::sin(deg2rad(p.angle_deg)));
    const Eigen::Vector2d dq(std::cos(deg2rad(q.angle_deg)), std::sin(deg2rad(q.angle_deg)));
    const double cross = dp.x() * dq.y() - dp.y() * dq.x();
    if (std::abs(cross) < 1e-12) throw Error(ErrorCode::NoTriangle, "two of the lines are parallel");
    const Eigen::Vector2d w = q.point - p.point;
    const double t = (w.x() * dq.y() - w.y() * dq.x()) / cross;
    return Eigen::Vector2d(p.point + t * dp);
  };
  // Vertex opposite each line.
  const Eigen::Vector2d va = intersect(l2, l3), vb = intersect(l1, l3), vc = intersect(l1, l2);
  const double a = (vb - vc).norm(), b = (va - vc).norm(), c = (va - vb).norm();
  if (a + b + c < 1e-12) throw Error(ErrorCode::NoTriangle, "the lines are concurrent");
  return (a * va + b * vb + c * vc) / (a + b + c);
}

Eigen::Vector2d l1_point_2d(const std::vector<Line2D>& lines) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(lines.size()), 2);
  Eigen::VectorXd b(a.rows());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const double t = deg2rad(lines[i].angle_deg);
    const Eigen::Vector2d n(-std::sin(t), std::cos(t));
    a.row(static_cast<Eigen::Index>(i)) = n.transpose();
    b(static_cast<Eigen::Index>(i)) = n.dot(lines[i].point);
  }
  return l1_minimize(a, b);
}

double rmse(const std::vector<Eigen::Vector3d>& estimates, const Eigen::Vector3d& truth) {
  if (estimates.empty()) throw Error(ErrorCode::InvalidArgument, "RMSE of an empty set");
  double acc = 0.0;
  for (const auto& e : estimates) acc += (e - truth).squaredNorm();
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

double rmse(const std::vector<double>& estimates, double truth) {
  if (estimates.empty()) throw Error(ErrorCode::InvalidArgument, "RMSE of an empty set");
  double acc = 0.0;
  for (double e : estimates) acc += (e - truth) * (e - truth);
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

PositionBound crlb_position(const std::vector<Eigen::Vector3d>& origins,
                            const Eigen::Vector3d& true_position, double angle_variance_deg2) {
  if (!(angle_variance_deg2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "angle variance must be positive");
  constexpr double h = 1e-5;
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(2 * origins.size()), 3);
  for (std::size_t i = 0; i < origins.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d step = Eigen::Vector3d::Zero();
      step(k) = h;
      const auto [az_p, el_p] = bearing_deg(origins[i], true_position + step);
      const auto [az_m, el_m] = bearing_deg(origins[i], true_position - step);
      const auto r = static_cast<Eigen::Index>(2 * i);
      jac(r, k) = wrap_deg(az_p - az_m) / (2.0 * h);
      jac(r + 1, k) = (el_p - el_m) / (2.0 * h);
    }
  }
  const Eigen::Matrix3d fim = jac.transpose() * jac / angle_variance_deg2;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(fim);
  if (!lu.isInvertible()) throw Error(ErrorCode::Unidentifiable, "position Fisher information is singular");
  PositionBound pb;
  pb.covariance = lu.inverse();
  pb.trace = pb.covariance.trace();
  return pb;
}

MastScenario mast_scenario(double distance_m, double spacing_m, double mast_height_m,
                           double target_height_m) {
  if (!(distance_m > 0.0) || !(spacing_m > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "distance and spacing must be positive");
  }
  MastScenario s;
  for (int i = -1; i <= 1; ++i) s.origins.emplace_back(0.0, i * spacing_m, mast_height_m);
  s.target = Eigen::Vector3d(distance_m, 0.0, target_height_m);
  return s;
}

double localization_rmse(const std::vector<Eigen::Vector3d>& origins, const Eigen::Vector3d& target,
                         double angle_variance_deg2, int trials, std::uint64_t seed, L1Solver solver) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
  const double sigma = std::sqrt(angle_variance_deg2);
  std::vector<Eigen::Vector3d> est(static_cast<std::size_t>(trials));
  parallel_for(est.size(), [&](std::size_t t) {
    const auto bearings = simulate_bearings(target, origins, sigma, derive_seed(seed, kBearingStream, t));
    est[t] = solve_l1(build_planes(bearings), solver).u;
  });
  return rmse(est, target);
}

}  // namespace doafoundry
