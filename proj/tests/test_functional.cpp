#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "flagquer/functional.hpp"
#include "test_support.hpp"

using namespace flagquer;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

RunOptions opts(std::uint64_t samples = 20000, std::uint64_t seed = 5) {
  RunOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

Body cube3() { return Body::cube(3, 1.0); }

LevelStackFn cube_indicator() { return LevelStackFn({{1.0, cube3()}}); }

LevelStackFn shrinking_stack(const Body& base) {
  std::vector<LevelStackFn::Level> levels;
  const double scale[] = {0.5, 0.75, 1.0};
  const double height[] = {3.0, 2.0, 1.0};
  for (int i = 0; i < 3; ++i) {
    const Eigen::MatrixXd t = scale[i] * Eigen::MatrixXd::Identity(base.dim(), base.dim());
    levels.push_back({height[i], base.apply_linear(t)});
  }
  return LevelStackFn(std::move(levels));
}

bool within_3se(const Estimate& e, double target) {
  return std::abs(e.mean - target) <=
         3.0 * e.std_error + 1e-9 * std::max(1.0, std::abs(target));
}

bool agree_3se(const Estimate& a, const Estimate& b) {
  const double se = std::hypot(a.std_error, b.std_error);
  return std::abs(a.mean - b.mean) <= 3.0 * se + 1e-9 * std::max(1.0, std::abs(a.mean));
}

Eigen::Matrix3d shear3() {
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  s(0, 1) = 0.7;
  return s;
}

}  // namespace

TEST_CASE("gaussian restriction norms") {
  const GaussianFn standard{Eigen::Matrix3d::Identity()};
  SECTION("standard gaussian restricts to pi^{k/2}") {
    const Eigen::MatrixXd plane =
        geom::orthonormal_complement(testsupport::test_direction(3, 1));
    REQUIRE(standard.restriction_l1(plane) == Approx(kPi));
    REQUIRE(standard.restriction_l1(plane.col(0)) == Approx(std::sqrt(kPi)));
    REQUIRE(standard.restriction_sup(plane) == 1.0);
  }
  SECTION("axis-aligned anisotropic case") {
    const GaussianFn f{Eigen::Vector3d(1.0, 4.0, 0.25).asDiagonal()};
    Eigen::MatrixXd span12(3, 2);
    span12 << 1, 0, 0, 1, 0, 0;
    REQUIRE(f.restriction_l1(span12) == Approx(kPi / 2.0));
    REQUIRE(f.l1_norm() == Approx(std::pow(kPi, 1.5)));
  }
  SECTION("validation") {
    Eigen::Matrix2d indef;
    indef << 1, 0, 0, -2;
    REQUIRE_THROWS_WITH(GaussianFn(indef), "gaussian matrix must be positive-definite");
  }
}

TEST_CASE("level stack invariants and norms") {
  SECTION("heights must decrease and bodies must nest") {
    REQUIRE_THROWS_WITH(LevelStackFn({{1.0, cube3()}, {2.0, cube3()}}),
                        "level heights must be strictly decreasing");
    REQUIRE_THROWS_WITH(
        LevelStackFn({{2.0, cube3()}, {1.0, Body::cube(3, 0.5)}}),
        "level bodies are not nested");
  }
  SECTION("indicator of the cube restricts by section volume") {
    Eigen::MatrixXd span12(3, 2);
    span12 << 1, 0, 0, 1, 0, 0;
    REQUIRE(cube_indicator().restriction_l1(span12) == Approx(4.0));
    REQUIRE(cube_indicator().restriction_sup(span12) == 1.0);
    REQUIRE(cube_indicator().l1_norm() == Approx(8.0));
  }
  SECTION("layer-cake norms of a staircase") {
    const LevelStackFn f = shrinking_stack(cube3());
    // sum (t_i - t_{i+1}) |K_i| with volumes 1, 3.375, 8
    REQUIRE(f.l1_norm() == Approx(1.0 * 1.0 + 1.0 * 3.375 + 1.0 * 8.0));
    REQUIRE(f.sup_norm() == Approx(3.0));
  }
}

TEST_CASE("functional I") {
  const IndexSeq seq(3, {1, 2});
  SECTION("standard gaussian gives pi^{i_r n / 2} with zero variance") {
    const Estimate e = functional_I(FlagFunction{GaussianFn(Eigen::Matrix3d::Identity())},
                                    seq, opts(2000));
    REQUIRE(e.mean == Approx(std::pow(kPi, 3.0)));
    REQUIRE(e.std_error <= 1e-9);
  }
  SECTION("invariance under volume-preserving maps") {
    StreamRng rng(0xABCD, 0);
    Eigen::Matrix3d g;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) = rng.normal();
    g /= std::cbrt(std::abs(g.determinant()));
    const Estimate base = functional_I(
        FlagFunction{GaussianFn(Eigen::Matrix3d::Identity())}, seq, opts(30000, 11));
    const Estimate moved =
        functional_I(FlagFunction{GaussianFn(g.transpose() * g)}, seq, opts(30000, 11));
    REQUIRE(agree_3se(base, moved));
  }
  SECTION("level stacks average their section layer cakes") {
    const Estimate e = functional_I(FlagFunction{cube_indicator()}, seq, opts(30000, 13));
    // for the indicator, I(f) is the psi_r integrand average: psi^{i_r n}
    const Estimate p = psi_r(cube3(), seq, opts(30000, 13));
    REQUIRE(e.mean == Approx(p.raw_mean).epsilon(1e-12));
  }
}

TEST_CASE("generalized invariance profiles") {
  const IndexSeq seq(3, {1, 2});
  const Eigen::Matrix3d t = Eigen::Vector3d(4.0, 0.25, 1.0).asDiagonal();
  const FlagFunction base{GaussianFn(Eigen::Matrix3d::Identity())};
  const FlagFunction moved{GaussianFn(t.transpose() * t)};
  SECTION("balanced profile with arbitrary sup exponents is invariant") {
    const NormProfile balanced{{2.0, 2.0}, {0.7, 1.3}};
    const Estimate a = flag_norm_average({&base}, seq, balanced, opts(30000, 17));
    const Estimate b = flag_norm_average({&moved}, seq, balanced, opts(30000, 17));
    REQUIRE(agree_3se(a, b));
  }
  SECTION("unbalanced profile drifts by more than 5 SE (negative control)") {
    const NormProfile unbalanced{{3.0, 1.0}, {0.0, 0.0}};
    const Estimate a = flag_norm_average({&base}, seq, unbalanced, opts(30000, 19));
    const Estimate b = flag_norm_average({&moved}, seq, unbalanced, opts(30000, 19));
    const double se = std::hypot(a.std_error, b.std_error);
    REQUIRE(std::abs(a.mean - b.mean) > 5.0 * se);
  }
}

TEST_CASE("flag ratio bound") {
  const IndexSeq seq(3, {1, 2});
  SECTION("standard gaussian: lhs pi^3 against the closed-form cap") {
    const BoundReport r = dpp_flag_ratio(FlagFunction{GaussianFn(Eigen::Matrix3d::Identity())},
                                         seq, opts(2000));
    REQUIRE(r.lhs.mean == Approx(std::pow(kPi, 3.0)));
    REQUIRE(r.bound == Approx(2.25 * std::pow(kPi, 3.0)));
    REQUIRE(r.holds_within_3se);
  }
  SECTION("ball indicator attains the cap exactly") {
    const BoundReport r = dpp_flag_ratio(
        FlagFunction{LevelStackFn({{1.0, Body::ball(3, 1.0)}})}, seq, opts(2000));
    REQUIRE(r.lhs.mean == Approx(r.bound));
    REQUIRE(r.bound == Approx(4.0 * kPi * kPi));
  }
  SECTION("cube indicator stays strictly below the cap") {
    const BoundReport r = dpp_flag_ratio(FlagFunction{cube_indicator()}, seq, opts(40000, 23));
    REQUIRE(r.margin_se > 3.0);
  }
  SECTION("dilation leaves the lhs/bound ratio invariant") {
    const GaussianFn f{Eigen::Vector3d(1.0, 2.0, 0.5).asDiagonal()};
    Eigen::Matrix3d quarter = f.matrix() / 4.0;  // f(x/2)
    const BoundReport r1 = dpp_flag_ratio(FlagFunction{f}, seq, opts(5000, 29));
    const BoundReport r2 = dpp_flag_ratio(FlagFunction{GaussianFn(quarter)}, seq,
                                          opts(5000, 29));
    REQUIRE(r1.lhs.mean / r1.bound == Approx(r2.lhs.mean / r2.bound).epsilon(1e-12));
  }
}

TEST_CASE("restriction sup norm never exceeds the global sup norm") {
  const std::vector<FlagFunction> fns = {
      FlagFunction{GaussianFn(Eigen::Vector3d(2.0, 1.0, 0.5).asDiagonal())},
      FlagFunction{shrinking_stack(cube3())},
      FlagFunction{shrinking_stack(Body::ball(3, 1.0))}};
  for (const auto& f : fns) {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const Eigen::MatrixXd frame =
          geom::orthonormal_complement(testsupport::test_direction(3, 600 + i));
      REQUIRE(restriction_sup(f, frame) >= 0.0);
      REQUIRE(restriction_sup(f, frame) <= sup_norm(f) + 1e-12);
      REQUIRE(restriction_l1(f, frame) >= 0.0);
    }
  }
}

TEST_CASE("multi-function q=1 is the single-function kernel at the mixed exponents") {
  const IndexSeq seq(3, {1, 2});
  const FlagFunction f{shrinking_stack(cube3())};
  std::vector<FlagFunction> one = {f};
  const BoundReport via_multi = multi_function_ratio(one, seq, opts(4000, 71));
  // hand-built profile: l1 = (i2/i1, (i3-i2)/i2), sup = ((i2-i1)/i1, (i3-i2)/i2)
  const NormProfile profile{{2.0, 0.5}, {1.0, 0.5}};
  const Estimate direct = flag_norm_average({&f}, seq, profile, opts(4000, 71));
  REQUIRE(via_multi.lhs.mean == Approx(direct.mean).epsilon(1e-12));
  REQUIRE(via_multi.lhs.std_error == Approx(direct.std_error).epsilon(1e-12));
}

TEST_CASE("multi-function mixed bound") {
  SECTION("q out of range is rejected") {
    const IndexSeq seq(3, {1, 2});
    std::vector<FlagFunction> two(2, FlagFunction{GaussianFn(Eigen::Matrix3d::Identity())});
    REQUIRE_THROWS_WITH(multi_function_ratio(two, seq, opts(100)),
                        "function count must satisfy 1 <= q <= i_1");
  }
  SECTION("single standard gaussian has the closed-form lhs") {
    const IndexSeq seq(3, {1, 2});
    std::vector<FlagFunction> one = {FlagFunction{GaussianFn(Eigen::Matrix3d::Identity())}};
    const BoundReport r = multi_function_ratio(one, seq, opts(2000));
    REQUIRE(r.lhs.mean == Approx(std::pow(kPi, 1.5)));
    REQUIRE(r.holds_within_3se);
  }
  SECTION("two gaussians on a single-index sequence hold with margin") {
    const IndexSeq seq(3, {2});
    std::vector<FlagFunction> two = {
        FlagFunction{GaussianFn(Eigen::Matrix3d::Identity())},
        FlagFunction{GaussianFn(Eigen::Vector3d(2.0, 1.0, 0.5).asDiagonal())}};
    const BoundReport r = multi_function_ratio(two, seq, opts(30000, 31));
    REQUIRE(r.margin_se > 3.0);
  }
  SECTION("scaling any one function rescales both sides equally") {
    const IndexSeq seq(3, {1, 2});
    const LevelStackFn f = shrinking_stack(cube3());
    std::vector<LevelStackFn::Level> doubled;
    for (const auto& level : f.levels()) doubled.push_back({2.0 * level.height, level.body});
    std::vector<FlagFunction> one = {FlagFunction{f}};
    std::vector<FlagFunction> scaled = {FlagFunction{LevelStackFn(doubled)}};
    const BoundReport r1 = multi_function_ratio(one, seq, opts(5000, 37));
    const BoundReport r2 = multi_function_ratio(scaled, seq, opts(5000, 37));
    REQUIRE(r1.lhs.mean / r1.bound == Approx(r2.lhs.mean / r2.bound).epsilon(1e-12));
  }
}

TEST_CASE("function projection") {
  const Eigen::MatrixXd plane = geom::orthonormal_complement(testsupport::test_direction(3, 41));
  SECTION("indicator projects to the indicator of the shadow") {
    const LevelStackFn shadow = project_function(cube_indicator(), plane);
    REQUIRE(shadow.dim() == 2);
    REQUIRE(shadow.levels().size() == 1);
    REQUIRE(shadow.levels()[0].body.volume() ==
            Approx(cube3().projection_volume(plane)).epsilon(1e-9));
  }
  SECTION("full-space frame is the identity") {
    const LevelStackFn same =
        project_function(shrinking_stack(cube3()), Eigen::MatrixXd::Identity(3, 3));
    for (int i = 0; i < same.size(); ++i)
      REQUIRE(same.levels()[static_cast<std::size_t>(i)].body.volume() ==
              Approx(shrinking_stack(cube3())
                         .levels()[static_cast<std::size_t>(i)]
                         .body.volume())
                  .epsilon(1e-9));
  }
  SECTION("projection preserves nesting (constructor re-verifies)") {
    REQUIRE_NOTHROW(project_function(shrinking_stack(Body::ball(3, 1.0)), plane));
  }
}

TEST_CASE("symmetric decreasing rearrangement") {
  SECTION("cube indicator becomes the equal-volume ball") {
    const LevelStackFn r = rearrange(cube_indicator());
    REQUIRE(r.levels().size() == 1);
    REQUIRE(r.levels()[0].body.kind() == Body::Kind::ball);
    REQUIRE(r.levels()[0].body.radius() ==
            Approx(std::cbrt(8.0 / geom::unit_ball_volume(3))));
  }
  SECTION("idempotent") {
    const LevelStackFn once = rearrange(shrinking_stack(cube3()));
    const LevelStackFn twice = rearrange(once);
    for (int i = 0; i < once.size(); ++i)
      REQUIRE(twice.levels()[static_cast<std::size_t>(i)].body.radius() ==
              once.levels()[static_cast<std::size_t>(i)].body.radius());
  }
  SECTION("layer-cake mass is preserved") {
    const LevelStackFn f = shrinking_stack(cube3());
    REQUIRE(rearrange(f).l1_norm() == Approx(f.l1_norm()).epsilon(1e-9));
  }
}

TEST_CASE("layer-cake phi of a function") {
  const IndexSeq seq(3, {1, 2});
  SECTION("indicator reduces to the body quantity") {
    const Estimate f = phi_r_of_function(cube_indicator(), seq, opts(30000, 43));
    const Estimate b = phi_r(cube3(), seq, opts(30000, 47));
    REQUIRE(agree_3se(f, b));
  }
  SECTION("invariant under volume-preserving affine maps") {
    const LevelStackFn f = shrinking_stack(cube3());
    std::vector<LevelStackFn::Level> moved;
    for (const auto& level : f.levels())
      moved.push_back({level.height,
                       level.body.apply_linear(shear3()).translate(
                           Eigen::Vector3d(0.2, -0.1, 0.3))});
    const Estimate a = phi_r_of_function(f, seq, opts(30000, 53));
    const Estimate b = phi_r_of_function(LevelStackFn(moved), seq, opts(30000, 53));
    REQUIRE(agree_3se(a, b));
  }
  SECTION("dilation scales the value by lambda, exactly under shared flags") {
    const LevelStackFn f = shrinking_stack(cube3());
    std::vector<LevelStackFn::Level> dilated;
    for (const auto& level : f.levels())
      dilated.push_back(
          {level.height, level.body.apply_linear(2.0 * Eigen::Matrix3d::Identity())});
    const Estimate a = phi_r_of_function(f, seq, opts(4000, 59));
    const Estimate b = phi_r_of_function(LevelStackFn(dilated), seq, opts(4000, 59));
    REQUIRE(b.mean == Approx(2.0 * a.mean).epsilon(1e-12));
  }
  SECTION("rearrangement ratio is finite, positive, and 1 for ellipsoid stacks") {
    const LevelStackFn f = shrinking_stack(cube3());
    const Estimate a = phi_r_of_function(f, seq, opts(20000, 61));
    const Estimate b = phi_r_of_function(rearrange(f), seq, opts(20000, 61));
    const double ratio = a.mean / b.mean;
    REQUIRE(std::isfinite(ratio));
    REQUIRE(ratio > 0.0);

    Eigen::Vector3d d(4.0, 0.25, 1.0);
    const LevelStackFn e = shrinking_stack(Body::ellipsoid(d.asDiagonal()));
    const Estimate ee = phi_r_of_function(e, seq, opts(20000, 67));
    const Estimate er = phi_r_of_function(rearrange(e), seq, opts(20000, 67));
    const double se = std::hypot(ee.std_error, er.std_error);
    REQUIRE(std::abs(ee.mean - er.mean) <= 3.0 * se);
  }
}
