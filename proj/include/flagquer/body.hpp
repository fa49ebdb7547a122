#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flagquer/estimate.hpp"
#include "flagquer/geometry.hpp"
#include "flagquer/parallel.hpp"
#include "flagquer/sampler.hpp"

namespace flagquer {

/// Convex body as a tagged union of representations. Instances are immutable
/// values; every derived quantity a representation needs (inverse quadratic
/// form, the other polytope representation, volume) is computed eagerly at
/// construction so all query operations are const and contention-free.
///
/// Balls and ellipsoids carry an optional center so translated bodies stay
/// exactly representable; polytopes encode translation in their data.
class Body {
 public:
  enum class Kind { ball, ellipsoid, cube, polytope_v, polytope_h };

  static constexpr int kMaxClosedFormDim = 8;
  static constexpr int kMaxPolytopeDim = 6;
  static constexpr int kMaxFacets = 64;

  static Body ball(int n, double radius) { return ball(n, radius, Eigen::VectorXd::Zero(n)); }

  static Body ball(int n, double radius, Eigen::VectorXd center) {
    check_dim(n, kMaxClosedFormDim);
    if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    if (center.size() != n) throw std::invalid_argument("center dimension mismatch");
    Body b(Kind::ball, n);
    b.radius_ = radius;
    b.center_ = std::move(center);
    return b;
  }

  static Body ellipsoid(Eigen::MatrixXd m) {
    const int n = static_cast<int>(m.rows());
    return ellipsoid(std::move(m), Eigen::VectorXd::Zero(n));
  }

  static Body ellipsoid(Eigen::MatrixXd m, Eigen::VectorXd center) {
    const int n = static_cast<int>(m.rows());
    check_dim(n, kMaxClosedFormDim);
    if (m.cols() != n) throw std::invalid_argument("ellipsoid matrix must be square");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("ellipsoid matrix must be symmetric");
    if (center.size() != n) throw std::invalid_argument("center dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
    if (eig.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("ellipsoid matrix must be positive-definite");
    Body b(Kind::ellipsoid, n);
    b.quad_ = 0.5 * (m + m.transpose());
    b.quad_inv_ = eig.operatorInverseSqrt() * eig.operatorInverseSqrt();
    b.quad_det_ = eig.eigenvalues().prod();
    b.quad_eig_max_ = eig.eigenvalues().maxCoeff();
    b.center_ = std::move(center);
    return b;
  }

  static Body cube(int n, double half_width) {
    check_dim(n, kMaxClosedFormDim);
    if (!(half_width > 0.0)) throw std::invalid_argument("cube half_width must be positive");
    Body b(Kind::cube, n);
    b.half_width_ = half_width;
    b.center_ = Eigen::VectorXd::Zero(n);
    b.facet_a_.resize(2 * n, n);
    b.facet_a_ << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
    b.facet_b_ = Eigen::VectorXd::Constant(2 * n, half_width);
    b.verts_.resize(n, 1 << n);
    for (int mask = 0; mask < (1 << n); ++mask)
      for (int i = 0; i < n; ++i)
        b.verts_(i, mask) = (mask >> i & 1) ? half_width : -half_width;
    return b;
  }

  /// Convex hull of the given points (columns).
  static Body polytope_v(Eigen::MatrixXd vertices) {
    const int n = static_cast<int>(vertices.rows());
    check_dim(n, kMaxPolytopeDim);
    if (vertices.cols() < n + 1)
      throw std::invalid_argument("polytope needs at least n+1 vertices");
    Eigen::MatrixXd centered = vertices.rightCols(vertices.cols() - 1);
    centered.colwise() -= vertices.col(0);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(centered);
    qr.setThreshold(1e-10);
    if (qr.rank() < n)
      throw std::invalid_argument("degenerate: vertices must span the full dimension");
    Body b(Kind::polytope_v, n);
    b.verts_ = std::move(vertices);
    const auto facets = geom::hull_facets(b.verts_);
    if (facets.empty()) throw std::invalid_argument("degenerate: vertex hull has no facets");
    b.facet_a_.resize(static_cast<int>(facets.size()), n);
    b.facet_b_.resize(static_cast<int>(facets.size()));
    for (std::size_t i = 0; i < facets.size(); ++i) {
      b.facet_a_.row(static_cast<int>(i)) = facets[i].normal.transpose();
      b.facet_b_(static_cast<int>(i)) = facets[i].offset;
    }
    b.volume_ = geom::hull_volume(b.verts_);
    b.center_ = Eigen::VectorXd::Zero(n);
    return b;
  }

  static Body polytope_h(Eigen::MatrixXd a, Eigen::VectorXd rhs) {
    const int n = static_cast<int>(a.cols());
    check_dim(n, kMaxPolytopeDim);
    if (a.rows() != rhs.size()) throw std::invalid_argument("A and b sizes disagree");
    if (a.rows() > kMaxFacets) throw std::invalid_argument("too many facets (limit 64)");
    if (!geom::h_rep_bounded(a, rhs)) throw std::invalid_argument("unbounded");
    Body b(Kind::polytope_h, n);
    b.facet_a_ = std::move(a);
    b.facet_b_ = std::move(rhs);
    b.verts_ = geom::enumerate_vertices(b.facet_a_, b.facet_b_);
    b.volume_ = geom::h_polytope_volume(b.facet_a_, b.facet_b_);
    if (b.verts_.cols() <= n || !(b.volume_ > 0.0))
      throw std::invalid_argument("degenerate: polytope has empty interior");
    b.center_ = Eigen::VectorXd::Zero(n);
    return b;
  }

  Kind kind() const noexcept { return kind_; }
  int dim() const noexcept { return n_; }
  double radius() const noexcept { return radius_; }
  double half_width() const noexcept { return half_width_; }
  const Eigen::MatrixXd& quadratic_form() const noexcept { return quad_; }
  const Eigen::VectorXd& center() const noexcept { return center_; }
  const Eigen::MatrixXd& vertices() const noexcept { return verts_; }
  const Eigen::MatrixXd& facet_matrix() const noexcept { return facet_a_; }
  const Eigen::VectorXd& facet_offsets() const noexcept { return facet_b_; }

  bool is_polytope() const noexcept {
    return kind_ == Kind::cube || kind_ == Kind::polytope_v || kind_ == Kind::polytope_h;
  }

  double volume() const {
    switch (kind_) {
      case Kind::ball:
        return geom::unit_ball_volume(n_) * std::pow(radius_, n_);
      case Kind::ellipsoid:
        return geom::unit_ball_volume(n_) / std::sqrt(quad_det_);
      case Kind::cube:
        return std::pow(2.0 * half_width_, n_);
      default:
        return volume_;
    }
  }

  /// Radius of the ball with the same volume.
  double volume_radius() const {
    return std::pow(volume() / geom::unit_ball_volume(n_), 1.0 / n_);
  }

  double support(const Eigen::VectorXd& direction) const {
    switch (kind_) {
      case Kind::ball:
        return center_.dot(direction) + radius_ * direction.norm();
      case Kind::ellipsoid:
        return center_.dot(direction) +
               std::sqrt(direction.dot(quad_inv_ * direction));
      case Kind::cube:
        return half_width_ * direction.lpNorm<1>();
      default:
        return (verts_.transpose() * direction).maxCoeff();
    }
  }

  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const {
    switch (kind_) {
      case Kind::ball:
        return (x - center_).norm() <= radius_ + tol;
      case Kind::ellipsoid: {
        const Eigen::VectorXd d = x - center_;
        return d.dot(quad_ * d) <= 1.0 + tol;
      }
      case Kind::cube:
        return x.cwiseAbs().maxCoeff() <= half_width_ + tol;
      default:
        return (facet_a_ * x - facet_b_).maxCoeff() <= tol;
    }
  }

  bool origin_interior(double margin = 1e-9) const {
    switch (kind_) {
      case Kind::ball:
        return center_.norm() <= radius_ - margin;
      case Kind::ellipsoid:
        return 1.0 - std::sqrt(center_.dot(quad_ * center_)) >=
               margin * std::sqrt(quad_eig_max_);
      case Kind::cube:
        return half_width_ >= margin;
      default: {
        for (int i = 0; i < facet_a_.rows(); ++i)
          if (facet_b_(i) < margin * facet_a_.row(i).norm()) return false;
        return true;
      }
    }
  }

  /// k-dimensional volume of body ∩ span(frame); frame columns orthonormal.
  /// A subspace that misses the body gives 0.
  double section_volume(const Eigen::Ref<const Eigen::MatrixXd>& frame) const {
    const int k = static_cast<int>(frame.cols());
    switch (kind_) {
      case Kind::ball: {
        const double dist2 = (center_ - frame * (frame.transpose() * center_)).squaredNorm();
        const double rad2 = radius_ * radius_ - dist2;
        if (rad2 <= 0.0) return 0.0;
        return geom::unit_ball_volume(k) * std::pow(rad2, 0.5 * k);
      }
      case Kind::ellipsoid: {
        const Eigen::MatrixXd q = frame.transpose() * quad_ * frame;
        Eigen::LLT<Eigen::MatrixXd> llt(q);
        if (llt.info() != Eigen::Success) return 0.0;
        double det = 1.0;
        for (int i = 0; i < k; ++i) det *= llt.matrixL()(i, i);
        det *= det;
        double rad2 = 1.0 - center_.dot(quad_ * center_);
        if (center_.squaredNorm() > 0.0) {
          const Eigen::VectorXd l = frame.transpose() * (quad_ * center_);
          rad2 += l.dot(llt.solve(l));
        }
        if (rad2 <= 0.0) return 0.0;
        return geom::unit_ball_volume(k) * std::pow(rad2, 0.5 * k) / std::sqrt(det);
      }
      default: {
        if (k == 1) return segment_section(frame.col(0));
        return geom::h_polytope_volume(facet_a_ * frame, facet_b_);
      }
    }
  }

  /// k-dimensional volume of the orthogonal projection onto span(frame).
  double projection_volume(const Eigen::Ref<const Eigen::MatrixXd>& frame) const {
    const int k = static_cast<int>(frame.cols());
    switch (kind_) {
      case Kind::ball:
        return geom::unit_ball_volume(k) * std::pow(radius_, k);
      case Kind::ellipsoid: {
        const Eigen::MatrixXd q = frame.transpose() * quad_inv_ * frame;
        return geom::unit_ball_volume(k) * std::sqrt(q.determinant());
      }
      case Kind::cube: {
        // shadow of a box is a zonotope; its volume is the sum of the
        // absolute k x k minors of the generator matrix
        double sum = 0.0;
        std::vector<int> c(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
        Eigen::MatrixXd sub(k, k);
        do {
          for (int i = 0; i < k; ++i) sub.row(i) = frame.row(c[static_cast<std::size_t>(i)]);
          sum += std::abs(sub.determinant());
        } while (geom::next_combination(c, n_));
        return std::pow(2.0 * half_width_, k) * sum;
      }
      default: {
        const Eigen::MatrixXd shadow = frame.transpose() * verts_;
        if (k == 1) return shadow.row(0).maxCoeff() - shadow.row(0).minCoeff();
        if (k == 2) return geom::polygon_area(geom::convex_hull_2d(shadow));
        return geom::hull_volume(shadow);
      }
    }
  }

  /// h_{ΠL}(φ) = |P_{φ⊥} L|, the support of the projection body.
  double projection_body_support(const Eigen::VectorXd& phi) const {
    return projection_volume(geom::orthonormal_complement(phi));
  }

  /// Polar body {x : <x,y> <= 1 for all y in L}; origin must be interior.
  Body polar() const {
    if (!origin_interior(1e-9))
      throw std::domain_error("polar undefined: origin not interior");
    switch (kind_) {
      case Kind::ball:
        if (center_.norm() > 0.0)
          throw std::domain_error("polar of a translated ball is not representable");
        return ball(n_, 1.0 / radius_);
      case Kind::ellipsoid:
        if (center_.norm() > 0.0)
          throw std::domain_error("polar of a translated ellipsoid is not representable");
        return ellipsoid(quad_inv_);
      case Kind::cube: {
        Eigen::MatrixXd v(n_, 2 * n_);
        v << Eigen::MatrixXd::Identity(n_, n_) / half_width_,
            -Eigen::MatrixXd::Identity(n_, n_) / half_width_;
        return polytope_v(std::move(v));
      }
      case Kind::polytope_v:
        return polytope_h(verts_.transpose(), Eigen::VectorXd::Ones(verts_.cols()));
      default: {
        Eigen::MatrixXd v(n_, facet_a_.rows());
        for (int i = 0; i < facet_a_.rows(); ++i)
          v.col(i) = facet_a_.row(i).transpose() / facet_b_(i);
        return polytope_v(std::move(v));
      }
    }
  }

  /// Exact image under an invertible linear map.
  Body apply_linear(const Eigen::MatrixXd& t) const {
    if (t.rows() != n_ || t.cols() != n_) throw std::invalid_argument("transform shape mismatch");
    const double det = t.determinant();
    if (std::abs(det) <= 1e-12) throw std::invalid_argument("singular transform");
    switch (kind_) {
      case Kind::ball: {
        const Eigen::MatrixXd gram = t * t.transpose();
        const double s2 = gram.trace() / n_;
        if ((gram - s2 * Eigen::MatrixXd::Identity(n_, n_)).cwiseAbs().maxCoeff() <=
            1e-12 * s2)
          return ball(n_, radius_ * std::sqrt(s2), t * center_);
        const Eigen::MatrixXd m = gram.inverse() / (radius_ * radius_);
        return ellipsoid(0.5 * (m + m.transpose()), t * center_);
      }
      case Kind::ellipsoid: {
        const Eigen::MatrixXd tinv = t.inverse();
        const Eigen::MatrixXd m = tinv.transpose() * quad_ * tinv;
        return ellipsoid(0.5 * (m + m.transpose()), t * center_);
      }
      case Kind::cube: {
        if (is_signed_permutation_scale(t))
          return cube(n_, half_width_ * t.cwiseAbs().maxCoeff());
        return polytope_v(t * verts_);
      }
      case Kind::polytope_v:
        return polytope_v(t * verts_);
      default:
        return polytope_h(facet_a_ * t.inverse(), facet_b_);
    }
  }

  Body translate(const Eigen::VectorXd& shift) const {
    if (shift.size() != n_) throw std::invalid_argument("shift dimension mismatch");
    switch (kind_) {
      case Kind::ball:
        return ball(n_, radius_, center_ + shift);
      case Kind::ellipsoid:
        return ellipsoid(quad_, center_ + shift);
      case Kind::cube:
        return polytope_h(facet_a_, facet_b_ + facet_a_ * shift);
      case Kind::polytope_v:
        return polytope_v(verts_.colwise() + shift);
      default:
        return polytope_h(facet_a_, facet_b_ + facet_a_ * shift);
    }
  }

  /// The shadow P_F(body) as a body living in the subspace coordinates.
  Body project_to(const Eigen::Ref<const Eigen::MatrixXd>& frame) const {
    const int k = static_cast<int>(frame.cols());
    switch (kind_) {
      case Kind::ball:
        return ball(k, radius_, frame.transpose() * center_);
      case Kind::ellipsoid: {
        const Eigen::MatrixXd shadow_inv = frame.transpose() * quad_inv_ * frame;
        const Eigen::MatrixXd m = shadow_inv.inverse();
        return ellipsoid(0.5 * (m + m.transpose()), frame.transpose() * center_);
      }
      default:
        return polytope_v(frame.transpose() * verts_);
    }
  }

  /// Area and mean width (spherical average of the support function) of the
  /// 2-dimensional shadow onto φ⊥; the workhorse of the sphere-integral
  /// route in dimension 3.
  std::pair<double, double> shadow_area_and_mean_width(const Eigen::VectorXd& phi) const {
    if (n_ != 3) throw std::invalid_argument("2-d shadows require a 3-dimensional body");
    switch (kind_) {
      case Kind::ball:
        return {std::numbers::pi * radius_ * radius_, radius_};
      case Kind::ellipsoid: {
        const Eigen::MatrixXd basis = geom::orthonormal_complement(phi);
        const Eigen::Matrix2d sigma = basis.transpose() * quad_inv_ * basis;
        const double area = std::numbers::pi * std::sqrt(sigma.determinant());
        // spectrally accurate trapezoid rule on the smooth support function
        constexpr int kNodes = 128;
        double width = 0.0;
        for (int i = 0; i < kNodes; ++i) {
          const double a = 2.0 * std::numbers::pi * i / kNodes;
          const Eigen::Vector2d u(std::cos(a), std::sin(a));
          width += std::sqrt(u.dot(sigma * u));
        }
        return {area, width / kNodes};
      }
      default: {
        const Eigen::MatrixXd basis = geom::orthonormal_complement(phi);
        const auto hull = geom::convex_hull_2d(basis.transpose() * verts_);
        return {geom::polygon_area(hull),
                geom::polygon_perimeter(hull) / (2.0 * std::numbers::pi)};
      }
    }
  }

 private:
  Body(Kind kind, int n) : kind_(kind), n_(n) {}

  static void check_dim(int n, int cap) {
    if (n < 1) throw std::invalid_argument("dimension must be positive");
    if (n > cap)
      throw std::invalid_argument("dimension exceeds cap (" + std::to_string(cap) + ")");
  }

  bool is_signed_permutation_scale(const Eigen::MatrixXd& t) const {
    const double scale = t.cwiseAbs().maxCoeff();
    for (int j = 0; j < n_; ++j) {
      int nonzero = 0;
      for (int i = 0; i < n_; ++i) {
        const double a = std::abs(t(i, j));
        if (a > 1e-12 * scale) {
          ++nonzero;
          if (std::abs(a - scale) > 1e-12 * scale) return false;
        }
      }
      if (nonzero != 1) return false;
    }
    for (int i = 0; i < n_; ++i) {
      int nonzero = 0;
      for (int j = 0; j < n_; ++j)
        if (std::abs(t(i, j)) > 1e-12 * scale) ++nonzero;
      if (nonzero != 1) return false;
    }
    return true;
  }

  /// 1-dimensional section {t : body contains t*u}, by direct interval clipping.
  double segment_section(const Eigen::VectorXd& u) const {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const double b_scale = std::max(1.0, facet_b_.cwiseAbs().maxCoeff());
    for (int i = 0; i < facet_a_.rows(); ++i) {
      const double a = facet_a_.row(i).dot(u);
      if (std::abs(a) <= 1e-13) {
        if (facet_b_(i) < -1e-12 * b_scale) return 0.0;
        continue;
      }
      const double bound = facet_b_(i) / a;
      if (a > 0.0)
        hi = std::min(hi, bound);
      else
        lo = std::max(lo, bound);
    }
    return hi > lo ? hi - lo : 0.0;
  }

  Kind kind_;
  int n_;
  double radius_ = 0.0;
  double half_width_ = 0.0;
  double volume_ = 0.0;
  double quad_det_ = 0.0;
  double quad_eig_max_ = 0.0;
  Eigen::VectorXd center_;
  Eigen::MatrixXd quad_;      // ellipsoid: x^T quad_ x <= 1 (centered form)
  Eigen::MatrixXd quad_inv_;
  Eigen::MatrixXd verts_;     // polytopes and cube: vertex columns
  Eigen::MatrixXd facet_a_;   // polytopes and cube: facet_a_ x <= facet_b_
  Eigen::VectorXd facet_b_;
};

/// Monte Carlo mean width: the average of the support function over the
/// uniform probability measure on the sphere (no factor 2).
inline Estimate mean_width(const Body& body, std::uint64_t samples, std::uint64_t seed,
                           unsigned threads = 0) {
  const auto acc = parallel_reduce<ScalarMoments>(
      samples, threads, [&](ScalarMoments& m, std::uint64_t index) {
        StreamRng rng(seed, index);
        m.add(body.support(sample_sphere(body.dim(), rng)));
      });
  return finish_estimate(acc, 1.0, samples, seed);
}

}  // namespace flagquer
