#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "flagquer/geometry.hpp"
#include "flagquer/rng.hpp"
#include "test_support.hpp"

using namespace flagquer;
using Catch::Approx;

namespace {

Eigen::MatrixXd cube_vertices(int n, double h) {
  Eigen::MatrixXd v(n, 1 << n);
  for (int mask = 0; mask < (1 << n); ++mask)
    for (int i = 0; i < n; ++i) v(i, mask) = (mask >> i & 1) ? h : -h;
  return v;
}

Eigen::MatrixXd cross_vertices(int n) {
  Eigen::MatrixXd v(n, 2 * n);
  v << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  return v;
}

}  // namespace

TEST_CASE("unit ball volumes") {
  REQUIRE(geom::unit_ball_volume(0) == Approx(1.0));
  REQUIRE(geom::unit_ball_volume(1) == Approx(2.0));
  REQUIRE(geom::unit_ball_volume(2) == Approx(std::numbers::pi));
  REQUIRE(geom::unit_ball_volume(3) == Approx(4.0 * std::numbers::pi / 3.0));
  REQUIRE(geom::unit_ball_volume(4) == Approx(std::numbers::pi * std::numbers::pi / 2.0));
}

TEST_CASE("2d hull handles interior and duplicate points") {
  Eigen::MatrixXd pts(2, 7);
  pts << -1, 1, 1, -1, 0, 0.3, 1,
         -1, -1, 1, 1, 0, -0.2, 1;
  const auto hull = geom::convex_hull_2d(pts);
  REQUIRE(hull.size() == 4);
  REQUIRE(geom::polygon_area(hull) == Approx(4.0));
  REQUIRE(geom::polygon_perimeter(hull) == Approx(8.0));
}

TEST_CASE("vertex enumeration of a square with a redundant facet") {
  Eigen::MatrixXd a(5, 2);
  a << 1, 0, -1, 0, 0, 1, 0, -1, 1, 1;
  Eigen::VectorXd b(5);
  b << 1, 1, 1, 1, 5;  // last constraint never binds
  const Eigen::MatrixXd verts = geom::enumerate_vertices(a, b);
  REQUIRE(verts.cols() == 4);
  REQUIRE(geom::hull_volume(verts) == Approx(4.0));
}

TEST_CASE("infeasible system has no vertices") {
  Eigen::MatrixXd a(2, 1);
  a << 1, -1;
  Eigen::VectorXd b(2);
  b << 1, -2;  // x <= 1 and x >= 2
  REQUIRE(geom::enumerate_vertices(a, b).cols() == 0);
}

TEST_CASE("boundedness detection") {
  Eigen::MatrixXd cube_a(6, 3);
  cube_a << Eigen::MatrixXd::Identity(3, 3), -Eigen::MatrixXd::Identity(3, 3);
  REQUIRE(geom::h_rep_bounded(cube_a, Eigen::VectorXd::Ones(6)));

  Eigen::MatrixXd half(1, 3);
  half << 1, 0, 0;
  REQUIRE_FALSE(geom::h_rep_bounded(half, Eigen::VectorXd::Ones(1)));

  Eigen::MatrixXd orthant = -Eigen::MatrixXd::Identity(3, 3);
  REQUIRE_FALSE(geom::h_rep_bounded(orthant, Eigen::VectorXd::Zero(3)));

  Eigen::MatrixXd slab(2, 2);
  slab << 1, 0, -1, 0;  // |x| <= 1, y free
  REQUIRE_FALSE(geom::h_rep_bounded(slab, Eigen::VectorXd::Ones(2)));
}

TEST_CASE("hull volumes against independent oracles") {
  SECTION("cube point sets") {
    REQUIRE(geom::hull_volume(cube_vertices(3, 1.0)) == Approx(8.0));
    REQUIRE(geom::hull_volume(cube_vertices(4, 0.5)) == Approx(1.0));
  }
  SECTION("cross-polytopes vs orthant triangulation") {
    for (int n = 2; n <= 4; ++n)
      REQUIRE(geom::hull_volume(cross_vertices(n)) ==
              Approx(testsupport::cross_polytope_volume_oracle(n)).epsilon(1e-9));
  }
  SECTION("simplex vs determinant") {
    Eigen::MatrixXd v(3, 4);
    v << 0, 1, 0, 0,
         0, 0, 1, 0,
         0, 0, 0, 1;
    REQUIRE(geom::hull_volume(v) == Approx(1.0 / 6.0));
  }
  SECTION("degenerate point set gives zero") {
    Eigen::MatrixXd flat(3, 4);
    flat << 0, 1, 0, 1,
            0, 0, 1, 1,
            0, 0, 0, 0;
    REQUIRE(geom::hull_volume(flat) == 0.0);
  }
}

TEST_CASE("h-polytope volume agrees with the vertex route") {
  Eigen::MatrixXd a(6, 3);
  a << Eigen::MatrixXd::Identity(3, 3), -Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(6);
  REQUIRE(geom::h_polytope_volume(a, b) == Approx(8.0));

  // random bounded intersection of halfspaces through a box
  StreamRng rng(2024, 0);
  Eigen::MatrixXd rows(10, 3);
  Eigen::VectorXd rhs(10);
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector3d dir;
    for (int d = 0; d < 3; ++d) dir(d) = rng.normal();
    rows.row(i) = dir.normalized().transpose();
    rhs(i) = 0.6 + 0.5 * rng.uniform();
  }
  rows.bottomRows(6) << Eigen::MatrixXd::Identity(3, 3), -Eigen::MatrixXd::Identity(3, 3);
  rhs.tail(6).setOnes();
  const double direct = geom::h_polytope_volume(rows, rhs);
  const double via_points = geom::hull_volume(geom::enumerate_vertices(rows, rhs));
  REQUIRE(direct == Approx(via_points).epsilon(1e-9));
  REQUIRE(direct > 0.0);
  REQUIRE(direct < 8.0);
}

TEST_CASE("orthonormal complement") {
  const Eigen::VectorXd v = testsupport::test_direction(5, 1);
  const Eigen::MatrixXd q = geom::orthonormal_complement(v);
  REQUIRE(q.cols() == 4);
  REQUIRE((q.transpose() * v).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE((q.transpose() * q - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("facet enumeration orients outward and merges coplanar subsets") {
  const auto facets = geom::hull_facets(cube_vertices(3, 1.0));
  REQUIRE(facets.size() == 6);
  for (const auto& f : facets) {
    REQUIRE(f.support.size() == 4);
    REQUIRE(f.offset == Approx(1.0));
  }
}
