#pragma once

// Shared helpers for the test suites: small independent oracles (kept apart
// from the library code paths they check) and a two-sample Kolmogorov-Smirnov
// test for distributional contracts.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "flagquer/rng.hpp"

namespace testsupport {

/// Asymptotic two-sample KS p-value (with the usual finite-sample
/// correction of the effective sample size).
inline double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += 2.0 * sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

/// Volume of conv(±e_1, ..., ±e_n) by direct orthant-simplex triangulation:
/// each orthant contributes a simplex of volume 1/n!.
inline double cross_polytope_volume_oracle(int n) {
  double factorial = 1.0;
  for (int k = 2; k <= n; ++k) factorial *= k;
  return std::pow(2.0, n) / factorial;
}

/// Sutherland-Hodgman clipping of a convex polygon by a*x <= c.
inline std::vector<Eigen::Vector2d> clip_polygon(const std::vector<Eigen::Vector2d>& poly,
                                                 const Eigen::Vector2d& a, double c) {
  std::vector<Eigen::Vector2d> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& p = poly[i];
    const Eigen::Vector2d& q = poly[(i + 1) % n];
    const double sp = a.dot(p) - c;
    const double sq = a.dot(q) - c;
    if (sp <= 0.0) out.push_back(p);
    if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0))
      out.push_back(p + (sp / (sp - sq)) * (q - p));
  }
  return out;
}

inline double polygon_area_oracle(const std::vector<Eigen::Vector2d>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(twice);
}

/// Independent 2-d section-area oracle for an H-polytope {x : Ax <= b} cut by
/// the plane spanned by the orthonormal columns of U: clip a generous box by
/// every halfplane.
inline double section_area_oracle(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                  const Eigen::MatrixXd& U, double box = 1e4) {
  std::vector<Eigen::Vector2d> poly = {{-box, -box}, {box, -box}, {box, box}, {-box, box}};
  const Eigen::MatrixXd AU = A * U;
  for (int i = 0; i < AU.rows() && !poly.empty(); ++i)
    poly = clip_polygon(poly, AU.row(i).transpose(), b(i));
  return polygon_area_oracle(poly);
}

/// Deterministic uniform direction for tests.
inline Eigen::VectorXd test_direction(int n, std::uint64_t salt) {
  flagquer::StreamRng rng(0xD15C0 + salt, 0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v.normalized();
}

}  // namespace testsupport
