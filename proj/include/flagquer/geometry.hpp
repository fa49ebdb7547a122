#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

namespace flagquer::geom {

/// Volume of the unit k-ball, omega_k = pi^{k/2} / Gamma(k/2 + 1).
inline double unit_ball_volume(int k) {
  return std::exp(0.5 * k * std::log(std::numbers::pi) - std::lgamma(0.5 * k + 1.0));
}

/// Advance c to the next k-combination of {0, ..., m-1}; false when done.
inline bool next_combination(std::vector<int>& c, int m) {
  const int k = static_cast<int>(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[static_cast<std::size_t>(i)] < m - k + i) {
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

namespace detail {

/// Solve a small square system; returns false if (numerically) singular.
inline bool solve_square(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs,
                         Eigen::VectorXd& out) {
  const int d = static_cast<int>(m.rows());
  if (d == 1) {
    if (m(0, 0) == 0.0) return false;
    out.resize(1);
    out(0) = rhs(0) / m(0, 0);
  } else if (d == 2) {
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (det == 0.0) return false;
    out.resize(2);
    out(0) = (rhs(0) * m(1, 1) - rhs(1) * m(0, 1)) / det;
    out(1) = (m(0, 0) * rhs(1) - m(1, 0) * rhs(0)) / det;
  } else {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    out = lu.solve(rhs);
  }
  if (!out.allFinite()) return false;
  // residual check also rejects near-singular subsets that PartialPivLU
  // "solved" to garbage
  const double scale = std::max({1.0, rhs.cwiseAbs().maxCoeff(), out.cwiseAbs().maxCoeff()});
  return (m * out - rhs).cwiseAbs().maxCoeff() <= 1e-7 * scale;
}

inline void dedup_columns(Eigen::MatrixXd& pts, double tol) {
  const int v = static_cast<int>(pts.cols());
  std::vector<int> keep;
  keep.reserve(static_cast<std::size_t>(v));
  for (int i = 0; i < v; ++i) {
    bool fresh = true;
    for (int j : keep) {
      if ((pts.col(i) - pts.col(j)).cwiseAbs().maxCoeff() <= tol) {
        fresh = false;
        break;
      }
    }
    if (fresh) keep.push_back(i);
  }
  if (static_cast<int>(keep.size()) == v) return;
  Eigen::MatrixXd out(pts.rows(), static_cast<int>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<int>(i)) = pts.col(keep[i]);
  pts.swap(out);
}

}  // namespace detail

/// Vertices of {y : A y <= b} by exhaustive facet-subset solving. Suitable for
/// the small systems this library works with (m <= 64 facets, dim <= 6).
inline Eigen::MatrixXd enumerate_vertices(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int d = static_cast<int>(A.cols());
  const int m = static_cast<int>(A.rows());
  std::vector<Eigen::VectorXd> verts;
  if (m < d) return Eigen::MatrixXd(d, 0);
  const double b_scale = std::max(1.0, b.cwiseAbs().maxCoeff());

  std::vector<int> c(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = i;
  Eigen::MatrixXd sub(d, d);
  Eigen::VectorXd rhs(d), y;
  do {
    for (int i = 0; i < d; ++i) {
      sub.row(i) = A.row(c[static_cast<std::size_t>(i)]);
      rhs(i) = b(c[static_cast<std::size_t>(i)]);
    }
    if (!detail::solve_square(sub, rhs, y)) continue;
    const double feas_tol = 1e-9 * std::max(b_scale, y.cwiseAbs().maxCoeff());
    if ((A * y - b).maxCoeff() > feas_tol) continue;
    bool fresh = true;
    for (const auto& w : verts) {
      if ((w - y).cwiseAbs().maxCoeff() <= feas_tol) {
        fresh = false;
        break;
      }
    }
    if (fresh) verts.push_back(y);
  } while (next_combination(c, m));

  Eigen::MatrixXd out(d, static_cast<int>(verts.size()));
  for (std::size_t i = 0; i < verts.size(); ++i) out.col(static_cast<int>(i)) = verts[i];
  return out;
}

/// Bounded iff the facet normals have full rank and the recession cone
/// {d : A d <= 0} contains no ray. Rays of a pointed cone lie on (dim-1)
/// active subsets, so exhaustive subset checking is exact at this scale.
inline bool h_rep_bounded(const Eigen::MatrixXd& A, const Eigen::VectorXd& /*b*/) {
  const int d = static_cast<int>(A.cols());
  const int m = static_cast<int>(A.rows());
  if (m < d) return false;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < d) return false;
  if (d == 1) return A.maxCoeff() > 0.0 && A.minCoeff() < 0.0;

  std::vector<int> c(static_cast<std::size_t>(d - 1));
  for (int i = 0; i < d - 1; ++i) c[static_cast<std::size_t>(i)] = i;
  Eigen::MatrixXd sub(d - 1, d);
  do {
    for (int i = 0; i < d - 1; ++i) sub.row(i) = A.row(c[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    lu.setThreshold(1e-10);
    if (lu.rank() != d - 1) continue;
    const Eigen::MatrixXd kernel = lu.kernel();
    if (kernel.cols() != 1) continue;
    const Eigen::VectorXd ray = kernel.col(0).normalized();
    const double tol = 1e-9;
    if ((A * ray).maxCoeff() <= tol || (A * (-ray)).maxCoeff() <= tol) return false;
  } while (next_combination(c, m));
  return true;
}

/// Lower-left hull of 2D point columns via the monotone chain; returns hull
/// points in counterclockwise order.
inline std::vector<Eigen::Vector2d> convex_hull_2d(const Eigen::MatrixXd& pts) {
  std::vector<Eigen::Vector2d> p;
  p.reserve(static_cast<std::size_t>(pts.cols()));
  for (int i = 0; i < pts.cols(); ++i) p.emplace_back(pts(0, i), pts(1, i));
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  p.erase(std::unique(p.begin(), p.end(),
                      [](const auto& a, const auto& b) {
                        return (a - b).cwiseAbs().maxCoeff() <= 1e-12;
                      }),
          p.end());
  const std::size_t n = p.size();
  if (n < 3) return p;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double polygon_area(const std::vector<Eigen::Vector2d>& hull) {
  if (hull.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

inline double polygon_perimeter(const std::vector<Eigen::Vector2d>& hull) {
  if (hull.size() < 2) return 0.0;
  double len = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    len += (hull[(i + 1) % hull.size()] - hull[i]).norm();
  return len;
}

/// Orthonormal basis of the hyperplane orthogonal to v (n x (n-1) columns).
inline Eigen::MatrixXd orthonormal_complement(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(n - 1);
}

struct HullFacet {
  Eigen::VectorXd normal;  // outward unit normal
  double offset = 0.0;     // normal . x = offset on the facet
  std::vector<int> support;
};

double hull_volume(const Eigen::MatrixXd& pts);

/// Facets of conv(points) by exhaustive supporting-hyperplane search,
/// deduplicated by support set. Points are columns; dimension = rows.
inline std::vector<HullFacet> hull_facets(const Eigen::MatrixXd& pts_in) {
  Eigen::MatrixXd pts = pts_in;
  const int d = static_cast<int>(pts.rows());
  const double scale = pts.size() ? std::max(1.0, pts.cwiseAbs().maxCoeff()) : 1.0;
  detail::dedup_columns(pts, 1e-9 * scale);
  const int v = static_cast<int>(pts.cols());
  std::vector<HullFacet> facets;
  if (v <= d) return facets;
  const double plane_tol = 1e-9 * scale;
  const Eigen::VectorXd centroid = pts.rowwise().mean();

  std::set<std::vector<int>> seen;
  std::vector<int> c(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = i;
  do {
    Eigen::VectorXd normal(d);
    if (d == 2) {
      const Eigen::VectorXd e = pts.col(c[1]) - pts.col(c[0]);
      normal << -e(1), e(0);
    } else if (d == 3) {
      const Eigen::Vector3d e1 = pts.col(c[1]) - pts.col(c[0]);
      const Eigen::Vector3d e2 = pts.col(c[2]) - pts.col(c[0]);
      normal = e1.cross(e2);
    } else {
      Eigen::MatrixXd edges(d - 1, d);
      for (int i = 1; i < d; ++i)
        edges.row(i - 1) = (pts.col(c[static_cast<std::size_t>(i)]) - pts.col(c[0])).transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(edges);
      lu.setThreshold(1e-10);
      if (lu.rank() != d - 1) continue;
      const Eigen::MatrixXd kernel = lu.kernel();
      if (kernel.cols() != 1) continue;
      normal = kernel.col(0);
    }
    const double len = normal.norm();
    if (len <= 1e-12 * scale) continue;
    normal /= len;
    const double offset = normal.dot(pts.col(c[0]));

    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < v; ++i) {
      const double s = normal.dot(pts.col(i)) - offset;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    int side = 0;
    if (hi <= plane_tol) side = 1;           // all points on or below: outward normal
    else if (lo >= -plane_tol) side = -1;    // all on or above: flip
    if (side == 0) continue;

    HullFacet f;
    f.normal = side * normal;
    f.offset = side * offset;
    for (int i = 0; i < v; ++i)
      if (std::abs(normal.dot(pts.col(i)) - offset) <= plane_tol) f.support.push_back(i);
    if (static_cast<int>(f.support.size()) < d) continue;
    if (seen.insert(f.support).second) {
      // orient strictly away from the centroid
      if (f.normal.dot(centroid) > f.offset) {
        f.normal = -f.normal;
        f.offset = -f.offset;
      }
      facets.push_back(std::move(f));
    }
  } while (next_combination(c, v));
  return facets;
}

/// Volume of conv(points); recursive cone decomposition over hull facets.
/// Degenerate (lower-dimensional) inputs give 0.
inline double hull_volume(const Eigen::MatrixXd& pts_in) {
  Eigen::MatrixXd pts = pts_in;
  const int d = static_cast<int>(pts.rows());
  if (pts.cols() == 0) return 0.0;
  const double scale = std::max(1.0, pts.cwiseAbs().maxCoeff());
  detail::dedup_columns(pts, 1e-9 * scale);
  const int v = static_cast<int>(pts.cols());
  if (v <= d) return 0.0;

  if (d == 1) return pts.row(0).maxCoeff() - pts.row(0).minCoeff();
  if (d == 2) return polygon_area(convex_hull_2d(pts));

  const auto facets = hull_facets(pts);
  if (facets.empty()) return 0.0;
  const Eigen::VectorXd centroid = pts.rowwise().mean();
  double volume = 0.0;
  for (const auto& f : facets) {
    Eigen::MatrixXd local(d - 1, static_cast<int>(f.support.size()));
    const Eigen::MatrixXd basis = orthonormal_complement(f.normal);
    const Eigen::VectorXd anchor = pts.col(f.support.front());
    for (std::size_t i = 0; i < f.support.size(); ++i)
      local.col(static_cast<int>(i)) = basis.transpose() * (pts.col(f.support[i]) - anchor);
    const double height = f.offset - f.normal.dot(centroid);
    if (height <= 0.0) continue;
    volume += hull_volume(local) * height / d;
  }
  return volume;
}

/// Volume of {y : A y <= b} using the known facet structure: enumerate
/// vertices, then cone off each facet from the vertex centroid.
inline double h_polytope_volume(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int d = static_cast<int>(A.cols());
  const Eigen::MatrixXd verts = enumerate_vertices(A, b);
  const int v = static_cast<int>(verts.cols());
  if (v <= d) return 0.0;
  if (d == 1) return verts.row(0).maxCoeff() - verts.row(0).minCoeff();
  if (d == 2) return polygon_area(convex_hull_2d(verts));

  const double scale = std::max(1.0, verts.cwiseAbs().maxCoeff());
  const double plane_tol = 1e-8 * scale;
  const Eigen::VectorXd centroid = verts.rowwise().mean();
  double volume = 0.0;
  for (int i = 0; i < A.rows(); ++i) {
    const double row_norm = A.row(i).norm();
    if (row_norm <= 1e-14) continue;
    std::vector<int> support;
    for (int j = 0; j < v; ++j)
      if (std::abs(A.row(i).dot(verts.col(j)) - b(i)) <= plane_tol * row_norm)
        support.push_back(j);
    if (static_cast<int>(support.size()) < d) continue;
    const Eigen::VectorXd normal = A.row(i).transpose() / row_norm;
    Eigen::MatrixXd local(d - 1, static_cast<int>(support.size()));
    const Eigen::MatrixXd basis = orthonormal_complement(normal);
    const Eigen::VectorXd anchor = verts.col(support.front());
    for (std::size_t k = 0; k < support.size(); ++k)
      local.col(static_cast<int>(k)) = basis.transpose() * (verts.col(support[k]) - anchor);
    const double height = b(i) / row_norm - normal.dot(centroid);
    if (height <= 0.0) continue;
    volume += hull_volume(local) * height / d;
  }
  return volume;
}

}  // namespace flagquer::geom
