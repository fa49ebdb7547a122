#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "flagquer/quermass.hpp"
#include "test_support.hpp"

using namespace flagquer;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

RunOptions opts(std::uint64_t samples = 20000, std::uint64_t seed = 7) {
  RunOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

Body cube3() { return Body::cube(3, 1.0); }

bool within_3se(const Estimate& e, double target) {
  return std::abs(e.mean - target) <=
         3.0 * e.std_error + 1e-9 * std::max(1.0, std::abs(target));
}

bool agree_3se(const Estimate& a, const Estimate& b) {
  const double se = std::hypot(a.std_error, b.std_error);
  return std::abs(a.mean - b.mean) <= 3.0 * se + 1e-9 * std::max(1.0, std::abs(a.mean));
}

}  // namespace

TEST_CASE("ball closed forms") {
  REQUIRE(ball_closed_form(IndexSeq(3, {1, 2}), 1.0) ==
          Approx(std::cbrt(2.0 * kPi)));
  REQUIRE(ball_closed_form(IndexSeq(4, {2}), 1.0) == Approx(std::sqrt(kPi)));
  REQUIRE(ball_closed_form(IndexSeq(4, {1, 3}), 1.0) ==
          Approx(std::pow(2.0 * 4.0 * kPi / 3.0, 0.25)));
  REQUIRE(ball_closed_form(IndexSeq(3, {1, 2}), 2.0) ==
          Approx(2.0 * std::cbrt(2.0 * kPi)));
}

TEST_CASE("psi and phi reproduce the ball closed form") {
  const IndexSeq seq(3, {1, 2});
  const Body ball = Body::ball(3, 1.0);
  const Estimate p = psi_r(ball, seq, opts());
  REQUIRE(within_3se(p, ball_closed_form(seq, 1.0)));
  const Estimate q = phi_r(ball, seq, opts());
  REQUIRE(within_3se(q, ball_closed_form(seq, 1.0)));
  // sections equal projections for balls, so both estimates coincide
  REQUIRE(p.mean == Approx(q.mean).epsilon(1e-9));
}

TEST_CASE("single-index sequence reduces to the Grassmannian quantity") {
  const Estimate p = psi_r(Body::ball(3, 1.0), IndexSeq(3, {2}), opts());
  REQUIRE(within_3se(p, std::sqrt(kPi)));  // omega_2^{1/2}
}

TEST_CASE("ellipsoid oracle and invariance") {
  const IndexSeq seq(3, {1, 2});
  Eigen::Vector3d d(4.0, 0.25, 1.0);
  const Body ell = Body::ellipsoid(d.asDiagonal());
  REQUIRE(ellipsoid_oracle_psi(ell, seq) == Approx(ball_closed_form(seq, 1.0)));
  REQUIRE(ellipsoid_oracle_psi(Body::ball(3, 2.0), seq) ==
          Approx(2.0 * ball_closed_form(seq, 1.0)));

  const Estimate est = psi_r(ell, seq, opts());
  REQUIRE(within_3se(est, ellipsoid_oracle_psi(ell, seq)));

  // image of the ball under diag(2,1,1/2) has the same dual quermassintegral
  const Eigen::Matrix3d t = Eigen::Vector3d(2.0, 1.0, 0.5).asDiagonal();
  const Estimate moved = psi_r(Body::ball(3, 1.0).apply_linear(t), seq, opts(20000, 9));
  const Estimate base = psi_r(Body::ball(3, 1.0), seq, opts(20000, 9));
  REQUIRE(agree_3se(moved, base));
}

TEST_CASE("translation invariance of phi") {
  const IndexSeq seq(3, {1, 2});
  const Estimate base = phi_r(cube3(), seq, opts());
  const Estimate moved = phi_r(cube3().translate(Eigen::Vector3d(0.4, -0.1, 0.25)), seq,
                               opts());
  REQUIRE(agree_3se(base, moved));
}

TEST_CASE("complete-flag quantities coincide with the reversal permutation") {
  const auto o = opts(5000, 21);
  const Estimate a = psi_full(cube3(), o);
  const Estimate b = psi_omega(cube3(), Permutation::reversal(3), o);
  REQUIRE(a.mean == b.mean);  // same estimator by construction
  REQUIRE(a.std_error == b.std_error);
}

TEST_CASE("homogeneity under common random numbers") {
  const auto o = opts(5000, 23);
  SECTION("psi_full is 1-homogeneous to 1e-12") {
    const Estimate a = psi_full(cube3(), o);
    const Estimate b = psi_full(Body::cube(3, 2.0), o);
    REQUIRE(std::abs(b.mean - 2.0 * a.mean) <= 1e-12 * (2.0 * a.mean));
  }
  SECTION("omega(n)=n statistic is 0-homogeneous to 1e-12") {
    const Permutation omega({2, 1, 3});
    const Estimate a = psi_omega(cube3(), omega, o);
    const Estimate b = psi_omega(Body::cube(3, 2.0), omega, o);
    REQUIRE(std::abs(b.mean - a.mean) <= 1e-12 * a.mean);
  }
}

TEST_CASE("omega flag quantities") {
  SECTION("the (2,1,3) average equals 4/pi on symmetric bodies") {
    const Estimate c = psi_omega(cube3(), Permutation({2, 1, 3}), opts(40000, 29));
    REQUIRE(within_3se(c, 4.0 / kPi));
    const Estimate b = psi_omega(Body::ball(3, 1.0), Permutation({2, 1, 3}), opts());
    REQUIRE(within_3se(b, 4.0 / kPi));
  }
  SECTION("embedded sequences reproduce psi_r sample by sample") {
    const IndexSeq seq(4, {1, 3});
    const Body ball4 = Body::ball(4, 1.0);
    const auto o = opts(2000, 31);
    const Estimate via_perm = psi_omega(ball4, Permutation::embed(seq), o);
    const Estimate direct = psi_r(ball4, seq, o);
    REQUIRE(via_perm.mean == Approx(direct.mean).epsilon(1e-12));
  }
  SECTION("ball closed form for permutations") {
    const Permutation omega({2, 1, 3});
    REQUIRE(ball_closed_form_omega(omega, 1.0) == Approx(4.0 / kPi));
    REQUIRE(ball_closed_form_omega(Permutation::reversal(3), 2.0) ==
            Approx(2.0 * ball_closed_form(IndexSeq(3, {1, 2}), 1.0)));
  }
  SECTION("negative section exponents require the origin inside") {
    const Body shifted = cube3().translate(Eigen::Vector3d(2.0, 0.0, 0.0));
    REQUIRE_THROWS_AS(psi_omega(shifted, Permutation({2, 1, 3}), opts(1000)),
                      std::domain_error);
  }
  SECTION("negative increment against the ball closed form") {
    // omega = (1,3,2): increments (-1, 2), outer power 1/3
    const Permutation omega({1, 3, 2});
    const double exact = ball_closed_form_omega(omega, 1.0);
    REQUIRE(exact == Approx(std::cbrt(kPi * kPi / 2.0)));
    const Estimate est = psi_omega(Body::ball(3, 1.0), omega, opts(5000, 71));
    REQUIRE(within_3se(est, exact));
    const Estimate scaled = psi_omega(Body::ball(3, 2.0), omega, opts(5000, 73));
    REQUIRE(within_3se(scaled, 2.0 * exact));
  }
}

TEST_CASE("partial versus complete flag routes") {
  const IndexSeq seq(3, {1, 2});
  auto direct = opts(20000, 37);
  auto nested = direct;
  nested.route = FlagRoute::via_complete;
  const Estimate a = psi_r(cube3(), seq, direct);
  const Estimate b = psi_r(cube3(), seq, nested);
  REQUIRE(agree_3se(a, b));
  // higher-dimensional case with a gap in the sequence
  const IndexSeq seq4(4, {1, 3});
  const Body ball4 = Body::ball(4, 1.0);
  auto nested4 = opts(10000, 39);
  nested4.route = FlagRoute::via_complete;
  const Estimate c = psi_r(ball4, seq4, nested4);
  REQUIRE(within_3se(c, ball_closed_form(seq4, 1.0)));
}

TEST_CASE("monotonicity under inclusion holds per sample") {
  const IndexSeq seq(3, {1, 2});
  const auto o = opts(5000, 41);
  const Estimate small = psi_r(Body::cube(3, 0.7), seq, o);
  const Estimate big = psi_r(cube3(), seq, o);
  REQUIRE(small.mean < big.mean);
}

TEST_CASE("example2 functional") {
  SECTION("the product constraint is enforced") {
    REQUIRE_THROWS_WITH(example2_A(1.0, 2.0, 1.0, opts(100)), "d1*d2*d3 must equal 1");
  }
  SECTION("quadrature oracle is converged and symmetric") {
    const double a = example2_a_quadrature(1, 1, 1, 256);
    const double b = example2_a_quadrature(1, 1, 1, 512);
    REQUIRE(a == Approx(b).epsilon(1e-12));
    REQUIRE(example2_a_quadrature(1, 2, 0.5, 256) ==
            Approx(example2_a_quadrature(0.5, 1, 2, 256)).epsilon(1e-12));
  }
  SECTION("Monte Carlo agrees with the quadrature oracle") {
    const Estimate mc = example2_A(1, 1, 1, opts(100000, 43));
    REQUIRE(within_3se(mc, example2_a_quadrature(1, 1, 1, 256)));
  }
  SECTION("the skew direction is strictly smaller") {
    const Estimate iso = example2_A(1, 1, 1, opts(100000, 47));
    const Estimate skew = example2_A(1, 2, 0.5, opts(100000, 47));
    const double se = std::hypot(iso.std_error, skew.std_error);
    REQUIRE(iso.mean - skew.mean > 5.0 * se);
  }
}

TEST_CASE("sphere identity for omega = (1,3,2)") {
  SECTION("ball hand value 2/pi^2 on both routes") {
    const auto pair = phi_omega_sphere_identity(Body::ball(3, 1.0), opts(5000, 51));
    const double hand = 2.0 / (kPi * kPi);
    REQUIRE(within_3se(pair.flag_side, hand));
    REQUIRE(within_3se(pair.sphere_side, hand));
  }
  SECTION("cube routes agree within 3 combined SE") {
    const auto pair = phi_omega_sphere_identity(cube3(), opts(40000, 53));
    REQUIRE(agree_3se(pair.flag_side, pair.sphere_side));
  }
  SECTION("diag(1,2,1/2) raises phi_omega of the cube") {
    // the identity maps larger Phi_omega to smaller Phi_omega^{-3}
    const Eigen::Matrix3d d = Eigen::Vector3d(1.0, 2.0, 0.5).asDiagonal();
    const auto plain = phi_omega_sphere_identity(cube3(), opts(60000, 57));
    const auto skew = phi_omega_sphere_identity(cube3().apply_linear(d), opts(60000, 57));
    const double se = std::hypot(plain.sphere_side.std_error, skew.sphere_side.std_error);
    REQUIRE(plain.sphere_side.mean - skew.sphere_side.mean > 3.0 * se);
  }
}

TEST_CASE("delta-method error propagation") {
  ScalarMoments acc;
  StreamRng rng(61, 0);
  for (int i = 0; i < 10000; ++i) acc.add(1.0 + 0.1 * rng.normal());
  const Estimate e = finish_estimate(acc, 0.5, 10000, 61);
  // SE(m^{1/2}) = 0.5 m^{-1/2} SE(m)
  REQUIRE(e.std_error ==
          Approx(0.5 * std::pow(acc.mean(), -0.5) * acc.std_error_of_mean()));
  REQUIRE(e.mean == Approx(std::sqrt(acc.mean())));
  REQUIRE(e.raw_mean == Approx(acc.mean()));
}

TEST_CASE("standard error shrinks like sqrt(2) when samples double") {
  const IndexSeq seq(3, {1, 2});
  const Estimate a = psi_r(cube3(), seq, opts(25000, 63));
  const Estimate b = psi_r(cube3(), seq, opts(50000, 63));
  const double ratio = a.std_error / b.std_error;
  REQUIRE(ratio > 0.8 * std::numbers::sqrt2);
  REQUIRE(ratio < 1.2 * std::numbers::sqrt2);
}

TEST_CASE("kurtosis diagnostics flag heavier tails") {
  const IndexSeq seq(3, {1, 2});
  const Eigen::Matrix3d t = Eigen::Vector3d(4.0, 0.25, 1.0).asDiagonal();
  const Estimate tame = psi_r(cube3(), seq, opts(20000, 67));
  const Estimate wild = psi_r(cube3().apply_linear(t), seq, opts(20000, 67));
  REQUIRE(wild.excess_kurtosis > tame.excess_kurtosis);
}
