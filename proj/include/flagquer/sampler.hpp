#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "flagquer/indices.hpp"
#include "flagquer/rng.hpp"

namespace flagquer {

/// Orthonormal basis of a k-dimensional subspace of R^n, stored as the
/// columns of an n x k matrix.
struct Frame {
  Eigen::MatrixXd basis;

  int ambient() const noexcept { return static_cast<int>(basis.rows()); }
  int dim() const noexcept { return static_cast<int>(basis.cols()); }

  /// || basis^T basis - I ||_inf; the orthonormality contract is 1e-10.
  double orthonormality_error() const {
    const Eigen::MatrixXd g = basis.transpose() * basis;
    return (g - Eigen::MatrixXd::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  }
};

/// Nested chain of frames matching an index sequence.
struct Flag {
  IndexSeq seq;
  std::vector<Frame> frames;

  /// Worst residual of projecting frame j onto the span of frame j+1;
  /// exact nesting gives 0, the contract is 1e-9.
  double nesting_residual() const {
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < frames.size(); ++j) {
      const Eigen::MatrixXd& small = frames[j].basis;
      const Eigen::MatrixXd& big = frames[j + 1].basis;
      const Eigen::MatrixXd residual = small - big * (big.transpose() * small);
      worst = std::max(worst, residual.cwiseAbs().maxCoeff());
    }
    return worst;
  }
};

namespace detail {

inline Eigen::MatrixXd gaussian_matrix(int rows, int cols, StreamRng& rng) {
  Eigen::MatrixXd g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

/// Thin QR of a Gaussian matrix with the R diagonal forced positive: the Q
/// factor is Haar on the Stiefel manifold of n x k frames.
inline Eigen::MatrixXd haar_frame(int n, int k, StreamRng& rng) {
  const Eigen::MatrixXd g = gaussian_matrix(n, k, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace detail

/// Haar-distributed orthogonal matrix on O(n).
inline Eigen::MatrixXd sample_orthogonal(int n, StreamRng& rng) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  return detail::haar_frame(n, n, rng);
}

/// Uniform point on S^{n-1}.
inline Eigen::VectorXd sample_sphere(int n, StreamRng& rng) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  Eigen::VectorXd v(n);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < n; ++i) v(i) = rng.normal();
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);
  return v / std::sqrt(norm2);
}

/// Haar flag: the j-th frame is the first i_j columns of one Haar orthogonal
/// matrix, so nesting is exact by construction and each span is Haar on its
/// Grassmannian.
inline Flag sample_flag(const IndexSeq& seq, StreamRng& rng) {
  const Eigen::MatrixXd q = sample_orthogonal(seq.ambient(), rng);
  Flag flag{seq, {}};
  flag.frames.reserve(static_cast<std::size_t>(seq.rank()));
  for (int j = 1; j <= seq.rank(); ++j)
    flag.frames.push_back(Frame{q.leftCols(seq.extended(j))});
  return flag;
}

/// Complete flag built by a chain of nested Grassmannian draws: a Haar
/// (n-1)-frame, then a Haar (n-2)-frame inside it, and so on. Distributionally
/// equal to sample_flag on the complete index sequence but a genuinely
/// different construction, which makes route comparisons meaningful tests.
inline Flag sample_complete_flag_nested(int n, StreamRng& rng) {
  std::vector<Frame> frames(static_cast<std::size_t>(n - 1));
  Eigen::MatrixXd basis = detail::haar_frame(n, n - 1, rng);
  frames[static_cast<std::size_t>(n - 2)] = Frame{basis};
  for (int k = n - 2; k >= 1; --k) {
    basis = basis * detail::haar_frame(k + 1, k, rng);
    frames[static_cast<std::size_t>(k - 1)] = Frame{basis};
  }
  return Flag{IndexSeq::complete(n), std::move(frames)};
}

/// Read the frames of a partial flag off a complete one (trivial extension).
inline Flag restrict_flag(const Flag& complete, const IndexSeq& seq) {
  if (!complete.seq.is_complete() || complete.seq.ambient() != seq.ambient())
    throw std::invalid_argument("restrict_flag expects a complete flag in the same dimension");
  Flag flag{seq, {}};
  flag.frames.reserve(static_cast<std::size_t>(seq.rank()));
  for (int j = 1; j <= seq.rank(); ++j)
    flag.frames.push_back(complete.frames[static_cast<std::size_t>(seq.extended(j) - 1)]);
  return flag;
}

}  // namespace flagquer
