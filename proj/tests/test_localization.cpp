// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "doafoundry/localization.hpp"
#include "doafoundry/lp.hpp"
#include "doafoundry/random.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace doafoundry;
using testutil::code_of;

TEST_CASE("bearings of axis-aligned targets") {
  const Eigen::Vector3d o(1.0, 1.0, 1.0);
  auto [az, el] = bearing_deg(o, Eigen::Vector3d(1.0, 3.0, 1.0));
  CHECK(az == doctest::Approx(90.0));
  CHECK(el == doctest::Approx(0.0));
  std::tie(az, el) = bearing_deg(o, Eigen::Vector3d(2.0, 1.0, 2.0));
  CHECK(az == doctest::Approx(0.0));
  CHECK(el == doctest::Approx(45.0));
  CHECK(code_of([&] { (void)bearing_deg(o, o); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("planes contain the true position when bearings are exact") {
  const auto s = mast_scenario(20.0);
  const auto p = build_planes(simulate_bearings(s.target, s.origins, 0.0, 1));
  CHECK(p.a.rows() == 6);
  CHECK((p.a * s.target - p.b).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index r = 0; r < p.a.rows(); ++r) CHECK(p.a.row(r).norm() == doctest::Approx(1.0));
  CHECK(p.provenance[1] == std::make_pair(0, PlaneKind::Elevation));
}

TEST_CASE("noiseless localization is exact for both solvers") {
  for (double d : {5.0, 10.0, 30.0, 80.0}) {
    const auto s = mast_scenario(d, 1.5);
    const auto planes = build_planes(simulate_bearings(s.target, s.origins, 0.0, 3));
    CHECK((solve_l1(planes).u - s.target).norm() < 1e-6);
    CHECK((solve_l1(planes, L1Solver::Irls).u - s.target).norm() < 1e-6);
  }
}

TEST_CASE("LP solution matches the exhaustive grid minimum") {
  const auto s = mast_scenario(10.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto planes = build_planes(simulate_bearings(s.target, s.origins, 0.1, 100 + seed));
    const auto est = solve_l1(planes);
    const Eigen::Vector3d seed_pt = planes.a.colPivHouseholderQr().solve(planes.b);
    const auto g = oracle::grid_l1_min(planes.a, planes.b, seed_pt, 0.6, 0.01);
    REQUIRE((est.u - seed_pt).cwiseAbs().maxCoeff() < 0.6);
    CHECK(est.objective <= g.value + 1e-9);
    CHECK(g.value <= est.objective + g.slack);
  }
}

TEST_CASE("IRLS reaches the LP objective") {
  const auto s = mast_scenario(20.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto planes = build_planes(simulate_bearings(s.target, s.origins, 0.3, seed));
    const auto lp = solve_l1(planes);
    const auto irls = solve_l1(planes, L1Solver::Irls);
    CHECK(irls.objective <= lp.objective * (1.0 + 1e-6) + 1e-9);
    CHECK(std::string(to_string(irls.solver)) == "irls");
  }
}

TEST_CASE("LP stays bounded on nearly parallel planes") {
  // At low bearing noise the azimuth normals agree to about 1e-6; this seed once
  // drove the tableau into a spurious ray.
  const auto s = mast_scenario(20.0);
  const auto stream = derive_seed(derive_seed(20240611, 61, 20), 0x42454152ULL, 1003);
  const auto planes = build_planes(simulate_bearings(s.target, s.origins, std::sqrt(0.001), stream));
  const auto lp = solve_l1(planes);
  const auto irls = solve_l1(planes, L1Solver::Irls);
  CHECK(lp.objective <= irls.objective + 1e-9);
  CHECK((lp.u - s.target).norm() < 1.0);
}

TEST_CASE("estimates are translation equivariant") {
  const auto s = mast_scenario(15.0);
  const Eigen::Vector3d shift(-40.0, 12.5, 3.0);
  std::vector<Eigen::Vector3d> moved;
  for (const auto& o : s.origins) moved.push_back(o + shift);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = solve_l1(build_planes(simulate_bearings(s.target, s.origins, 0.2, seed))).u;
    const auto b = solve_l1(build_planes(simulate_bearings(s.target + shift, moved, 0.2, seed))).u;
    CHECK((b - a - shift).norm() < 1e-6);
  }
}

TEST_CASE("plane construction and solver preconditions") {
  const auto s = mast_scenario(10.0);
  auto m = simulate_bearings(s.target, s.origins, 0.0, 1);
  CHECK(code_of([&] { (void)build_planes({m[0]}); }) == ErrorCode::InvalidArgument);
  m[1].elevation_deg = 90.0;
  CHECK(code_of([&] { (void)build_planes(m); }) == ErrorCode::DegeneratePlane);

  Eigen::MatrixXd a(4, 3);
  a << 1, 0, 0, 0, 1, 0, 1, 1, 0, 2, 0, 0;
  CHECK(code_of([&] { (void)l1_minimize(a, Eigen::VectorXd::Zero(4)); }) == ErrorCode::Unidentifiable);
  CHECK(code_of([&] { (void)l1_minimize(a, Eigen::VectorXd::Zero(3)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("simplex on small programs") {
  // min -x - y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
  Eigen::MatrixXd a(2, 4);
  a << 1, 2, 1, 0, 3, 1, 0, 1;
  Eigen::VectorXd b(2), c(4);
  b << 4, 6;
  c << -1, -1, 0, 0;
  const auto sol = simplex_minimize(c, a, b);
  CHECK(sol.objective == doctest::Approx(-2.8));
  CHECK(sol.x(0) == doctest::Approx(1.6));
  CHECK(sol.x(1) == doctest::Approx(1.2));

  Eigen::MatrixXd inf(1, 1);
  inf << 1;
  Eigen::VectorXd neg(1), one(1);
  neg << -1;
  one << 1;
  CHECK(code_of([&] { (void)simplex_minimize(one, inf, neg); }) == ErrorCode::SolverFailed);
  Eigen::MatrixXd ray(1, 2);
  ray << 1, -1;
  Eigen::VectorXd cr(2);
  cr << 0, -1;
  CHECK(code_of([&] { (void)simplex_minimize(cr, ray, one); }) == ErrorCode::SolverFailed);
}

TEST_CASE("incenter of a 3-4-5 triangle and the L1 point") {
  const Line2D bottom{{0.0, 0.0}, 0.0};
  const Line2D left{{0.0, 0.0}, 90.0};
  const Line2D hyp{{4.0, 0.0}, std::atan2(3.0, -4.0) * 180.0 / std::acos(-1.0)};
  const auto ic = incenter_2d(bottom, left, hyp);
  CHECK(ic.x() == doctest::Approx(1.0));
  CHECK(ic.y() == doctest::Approx(1.0));
  // Distance sum is linear on the triangle, so the minimum sits on the vertex
  // facing the longest side rather than at the incenter.
  const auto l1 = l1_point_2d({bottom, left, hyp});
  CHECK(l1.norm() < 1e-7);  // tie-break LP admits 1e-9 relative objective slack
  CHECK((l1 - ic).norm() > 1.0);
}

TEST_CASE("equilateral triangle keeps the incenter among the L1 minimizers") {
  const double pi = std::acos(-1.0);
  const Eigen::Vector2d p0(0, 0), p1(2, 0), p2(1, std::sqrt(3.0));
  const Line2D a{p0, 0.0}, b{p1, 120.0}, c{p0, 60.0};
  const auto ic = incenter_2d(a, b, c);
  CHECK((ic - (p0 + p1 + p2) / 3.0).norm() < 1e-12);
  const auto l1 = l1_point_2d({a, b, c});
  auto dist_sum = [&](const Eigen::Vector2d& x) {
    double s = 0.0;
    for (const auto& l : {a, b, c}) {
      const Eigen::Vector2d n(-std::sin(l.angle_deg * pi / 180), std::cos(l.angle_deg * pi / 180));
      s += std::abs(n.dot(x - l.point));
    }
    return s;
  };
  CHECK(dist_sum(l1) == doctest::Approx(dist_sum(ic)));
}

TEST_CASE("degenerate line triples have no incenter") {
  const Line2D a{{0, 0}, 0.0}, b{{0, 1}, 0.0}, c{{0, 0}, 45.0}, d{{0, 0}, 90.0};
  CHECK(code_of([&] { (void)incenter_2d(a, b, c); }) == ErrorCode::NoTriangle);
  CHECK(code_of([&] { (void)incenter_2d(a, c, d); }) == ErrorCode::NoTriangle);
}

TEST_CASE("position bound scaling") {
  const auto s10 = mast_scenario(10.0), s20 = mast_scenario(20.0);
  const auto b1 = crlb_position(s10.origins, s10.target, 0.01);
  const auto b2 = crlb_position(s10.origins, s10.target, 0.04);
  CHECK(b2.trace == doctest::Approx(4.0 * b1.trace));
  CHECK(crlb_position(s20.origins, s20.target, 0.01).trace > b1.trace);
  CHECK(b1.covariance.isApprox(b1.covariance.transpose()));
  CHECK(code_of([&] { (void)crlb_position(s10.origins, s10.target, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("rmse helpers") {
  CHECK(rmse(std::vector<double>{1.0, 3.0}, 2.0) == doctest::Approx(1.0));
  CHECK(rmse(std::vector<Eigen::Vector3d>{{1, 0, 0}, {0, 1, 0}}, Eigen::Vector3d::Zero()) == doctest::Approx(1.0));
  CHECK(code_of([] { (void)rmse(std::vector<double>{}, 0.0); }) == ErrorCode::InvalidArgument);
}
