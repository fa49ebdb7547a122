#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <vector>

#include "flagquer/body.hpp"
#include "flagquer/quermass.hpp"

namespace flagquer {

/// Centered Gaussian f(x) = exp(-x^T M x); restriction norms are closed-form,
/// so the only Monte Carlo error in functional quantities is the flag average.
class GaussianFn {
 public:
  explicit GaussianFn(Eigen::MatrixXd m) {
    const int n = static_cast<int>(m.rows());
    if (m.cols() != n) throw std::invalid_argument("gaussian matrix must be square");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("gaussian matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
    if (eig.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("gaussian matrix must be positive-definite");
    m_ = 0.5 * (m + m.transpose());
    det_ = eig.eigenvalues().prod();
  }

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }

  /// ∫_F f = pi^{k/2} / sqrt(det(U^T M U)).
  double restriction_l1(const Eigen::Ref<const Eigen::MatrixXd>& frame) const {
    const int k = static_cast<int>(frame.cols());
    const Eigen::MatrixXd q = frame.transpose() * m_ * frame;
    return std::pow(std::numbers::pi, 0.5 * k) / std::sqrt(q.determinant());
  }

  double restriction_sup(const Eigen::Ref<const Eigen::MatrixXd>&) const { return 1.0; }

  double l1_norm() const {
    return std::pow(std::numbers::pi, 0.5 * dim()) / std::sqrt(det_);
  }

  double sup_norm() const { return 1.0; }

 private:
  Eigen::MatrixXd m_;
  double det_ = 0.0;
};

/// Quasi-concave step function represented by level sets: heights
/// t_1 > ... > t_m > 0 with nested bodies K_1 ⊆ ... ⊆ K_m, f = max t_i 1_{K_i}.
/// Nesting is verified at construction by membership sampling.
class LevelStackFn {
 public:
  struct Level {
    double height;
    Body body;
  };

  static constexpr int kMaxLevels = 64;

  explicit LevelStackFn(std::vector<Level> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw std::invalid_argument("level stack must be nonempty");
    if (static_cast<int>(levels_.size()) > kMaxLevels)
      throw std::invalid_argument("level stack exceeds 64 levels");
    for (std::size_t i = 0; i + 1 < levels_.size(); ++i)
      if (!(levels_[i].height > levels_[i + 1].height))
        throw std::invalid_argument("level heights must be strictly decreasing");
    if (!(levels_.back().height > 0.0))
      throw std::invalid_argument("level heights must be positive");
    const int n = levels_.front().body.dim();
    for (const auto& level : levels_)
      if (level.body.dim() != n) throw std::invalid_argument("level dimensions disagree");
    verify_nesting();
  }

  int dim() const noexcept { return levels_.front().body.dim(); }
  int size() const noexcept { return static_cast<int>(levels_.size()); }
  const std::vector<Level>& levels() const noexcept { return levels_; }

  /// Height drop t_i - t_{i+1} with t_{m+1} = 0; the layer-cake weights.
  double weight(int i) const {
    const double next =
        i + 1 < size() ? levels_[static_cast<std::size_t>(i + 1)].height : 0.0;
    return levels_[static_cast<std::size_t>(i)].height - next;
  }

  double restriction_l1(const Eigen::Ref<const Eigen::MatrixXd>& frame) const {
    double total = 0.0;
    for (int i = 0; i < size(); ++i)
      total += weight(i) * levels_[static_cast<std::size_t>(i)].body.section_volume(frame);
    return total;
  }

  /// Largest level height whose body meets the subspace.
  double restriction_sup(const Eigen::Ref<const Eigen::MatrixXd>& frame) const {
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(dim());
    for (int i = 0; i < size(); ++i) {
      const Body& body = levels_[static_cast<std::size_t>(i)].body;
      if (body.contains(origin) || body.section_volume(frame) > 0.0)
        return levels_[static_cast<std::size_t>(i)].height;
    }
    return 0.0;
  }

  double l1_norm() const {
    double total = 0.0;
    for (int i = 0; i < size(); ++i)
      total += weight(i) * levels_[static_cast<std::size_t>(i)].body.volume();
    return total;
  }

  double sup_norm() const { return levels_.front().height; }

 private:
  void verify_nesting() const {
    constexpr int kPointsPerLevel = 1000;
    StreamRng rng(0x5eed, 0);
    for (std::size_t i = 0; i + 1 < levels_.size(); ++i) {
      const Body& inner = levels_[i].body;
      const Body& outer = levels_[i + 1].body;
      const int n = inner.dim();
      Eigen::VectorXd lo(n), hi(n), x(n);
      for (int d = 0; d < n; ++d) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(d) = 1.0;
        hi(d) = inner.support(e);
        lo(d) = -inner.support(-e);
      }
      int accepted = 0;
      long attempts = 0;
      const double tol = 1e-9 * std::max(1.0, hi.cwiseAbs().maxCoeff());
      while (accepted < kPointsPerLevel && attempts < 400000) {
        ++attempts;
        for (int d = 0; d < n; ++d) x(d) = lo(d) + (hi(d) - lo(d)) * rng.uniform();
        if (!inner.contains(x, 0.0)) continue;
        ++accepted;
        if (!outer.contains(x, tol))
          throw std::invalid_argument("level bodies are not nested");
      }
    }
  }

  std::vector<Level> levels_;
};

using FlagFunction = std::variant<GaussianFn, LevelStackFn>;

inline int function_dim(const FlagFunction& f) {
  return std::visit([](const auto& g) { return g.dim(); }, f);
}
inline double restriction_l1(const FlagFunction& f,
                             const Eigen::Ref<const Eigen::MatrixXd>& frame) {
  return std::visit([&](const auto& g) { return g.restriction_l1(frame); }, f);
}
inline double restriction_sup(const FlagFunction& f,
                              const Eigen::Ref<const Eigen::MatrixXd>& frame) {
  return std::visit([&](const auto& g) { return g.restriction_sup(frame); }, f);
}
inline double l1_norm(const FlagFunction& f) {
  return std::visit([](const auto& g) { return g.l1_norm(); }, f);
}
inline double sup_norm(const FlagFunction& f) {
  return std::visit([](const auto& g) { return g.sup_norm(); }, f);
}

// ---------------------------------------------------------------------------
// Flag averages of restriction-norm products
// ---------------------------------------------------------------------------

/// Exponent profile of one norm-ratio factor per flag level:
/// ||f|_{F_j}||_1^{l1[j]} / ||f|_{F_j}||_inf^{sup[j]}. The profiles with
/// l1[j] = i_{j+1}-i_{j-1} are exactly the ones whose flag averages are
/// invariant under volume-preserving maps (the sup exponents are free).
struct NormProfile {
  std::vector<double> l1;
  std::vector<double> sup;
};

/// E[prod_k prod_j ratio_{k,j}] over Haar flags for several functions sharing
/// one profile. Samples with a vanishing restriction are rejected.
inline Estimate flag_norm_average(const std::vector<const FlagFunction*>& fns,
                                  const IndexSeq& seq, const NormProfile& profile,
                                  const RunOptions& opts) {
  const int n = seq.ambient();
  const auto rank = static_cast<std::size_t>(seq.rank());
  if (profile.l1.size() != rank || profile.sup.size() != rank)
    throw std::invalid_argument("profile size must match the sequence rank");
  for (const FlagFunction* f : fns)
    if (function_dim(*f) != n)
      throw std::invalid_argument("function/index dimension mismatch");
  detail::Stopwatch watch;
  const auto acc = parallel_reduce<ScalarMoments>(
      opts.samples, opts.threads, [&](ScalarMoments& m, std::uint64_t index) {
        StreamRng rng(opts.seed, index);
        const Eigen::MatrixXd basis =
            sample_orthogonal(n, rng).leftCols(seq.extended(seq.rank()));
        double value = 1.0;
        bool ok = true;
        for (const FlagFunction* f : fns) {
          for (int j = 1; j <= seq.rank() && ok; ++j) {
            const auto frame = basis.leftCols(seq.extended(j));
            const double e1 = profile.l1[static_cast<std::size_t>(j - 1)];
            const double es = profile.sup[static_cast<std::size_t>(j - 1)];
            if (e1 != 0.0) {
              const double v = restriction_l1(*f, frame);
              if (!(v >= detail::kDegenerateVolume)) {
                ok = false;
                break;
              }
              value *= std::pow(v, e1);
            }
            if (es != 0.0) {
              const double v = restriction_sup(*f, frame);
              if (!(v >= detail::kDegenerateVolume)) {
                ok = false;
                break;
              }
              value /= std::pow(v, es);
            }
          }
          if (!ok) break;
        }
        if (!ok || !std::isfinite(value)) {
          m.reject();
          return;
        }
        m.add(value);
      });
  detail::check_reject_rate(acc, opts.samples);
  Estimate e = finish_estimate(acc, 1.0, opts.samples, opts.seed);
  e.wall_time_ms = watch.ms();
  return e;
}

/// I(f) = E[prod_j ||f|_{F_j}||_1^{i_{j+1}-i_{j-1}}]; no outer root.
inline Estimate functional_I(const FlagFunction& f, const IndexSeq& seq,
                             const RunOptions& opts) {
  if (function_dim(f) != seq.ambient())
    throw std::invalid_argument("function/index dimension mismatch");
  NormProfile profile;
  for (int j = 1; j <= seq.rank(); ++j) {
    profile.l1.push_back(seq.section_exponent(j));
    profile.sup.push_back(0.0);
  }
  return flag_norm_average({&f}, seq, profile, opts);
}

/// One-sided bound report: the flag average against its closed-form cap.
struct BoundReport {
  Estimate lhs;
  double bound = 0.0;
  double margin_se = 0.0;  // (bound - mean) / SE; positive means strict slack
  bool holds_within_3se = false;
};

namespace detail {

inline BoundReport finish_bound(Estimate lhs, double bound) {
  BoundReport r;
  r.lhs = std::move(lhs);
  r.bound = bound;
  const double floor = 1e-9 * std::max({1.0, std::abs(bound), std::abs(r.lhs.mean)});
  if (r.lhs.std_error > 0.0)
    r.margin_se = (bound - r.lhs.mean) / r.lhs.std_error;
  else if (std::abs(bound - r.lhs.mean) <= floor)
    r.margin_se = 0.0;
  else
    r.margin_se = bound > r.lhs.mean ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
  r.holds_within_3se = r.lhs.mean <= bound + 3.0 * r.lhs.std_error + floor;
  return r;
}

}  // namespace detail

/// The flag ratio statistic E[prod_j ||f|_{F_j}||_1^{i_{j+1}-i_{j-1}} /
/// ||f|_{F_j}||_inf^{i_{j+1}-i_j}] and its closed-form bound
/// prod_j (omega_{i_j}^{i_{j+1}} / omega_{i_{j+1}}^{i_j}) * ||f||_1^{i_r}.
inline BoundReport dpp_flag_ratio(const FlagFunction& f, const IndexSeq& seq,
                                  const RunOptions& opts) {
  if (function_dim(f) != seq.ambient())
    throw std::invalid_argument("function/index dimension mismatch");
  NormProfile profile;
  for (int j = 1; j <= seq.rank(); ++j) {
    profile.l1.push_back(seq.section_exponent(j));
    profile.sup.push_back(seq.extended(j + 1) - seq.extended(j));
  }
  Estimate lhs = flag_norm_average({&f}, seq, profile, opts);
  double log_bound = seq.extended(seq.rank()) * std::log(l1_norm(f));
  for (int j = 1; j <= seq.rank(); ++j) {
    log_bound += seq.extended(j + 1) * std::log(geom::unit_ball_volume(seq.extended(j)));
    log_bound -= seq.extended(j) * std::log(geom::unit_ball_volume(seq.extended(j + 1)));
  }
  return detail::finish_bound(std::move(lhs), std::exp(log_bound));
}

/// Multi-function variant: for 1 <= q <= i_1 functions, the mixed statistic
///   E[prod_k ||f_k|_{F_1}||_1^{i_2/i_1} / ||f_k|_{F_1}||_inf^{(i_2-i_1)/i_1}
///       prod_{j>=2} (||f_k|_{F_j}||_1 / ||f_k|_{F_j}||_inf)^{(i_{j+1}-i_j)/i_j}]
/// against (prod_j omega_{i_j}^{i_{j+1}/i_j} / omega_{i_{j+1}})^q prod_k ||f_k||_1.
inline BoundReport multi_function_ratio(const std::vector<FlagFunction>& fns,
                                        const IndexSeq& seq, const RunOptions& opts) {
  const int q = static_cast<int>(fns.size());
  if (q < 1 || q > seq.extended(1))
    throw std::invalid_argument("function count must satisfy 1 <= q <= i_1");
  for (const auto& f : fns)
    if (function_dim(f) != seq.ambient())
      throw std::invalid_argument("function/index dimension mismatch");

  NormProfile profile;
  for (int j = 1; j <= seq.rank(); ++j) {
    const double i_j = seq.extended(j);
    if (j == 1) {
      profile.l1.push_back(seq.extended(2) / i_j);
      profile.sup.push_back((seq.extended(2) - i_j) / i_j);
    } else {
      const double step = (seq.extended(j + 1) - i_j) / i_j;
      profile.l1.push_back(step);
      profile.sup.push_back(step);
    }
  }
  std::vector<const FlagFunction*> ptrs;
  ptrs.reserve(fns.size());
  for (const auto& f : fns) ptrs.push_back(&f);
  Estimate lhs = flag_norm_average(ptrs, seq, profile, opts);

  double log_factor = 0.0;
  for (int j = 1; j <= seq.rank(); ++j) {
    log_factor += (static_cast<double>(seq.extended(j + 1)) / seq.extended(j)) *
                  std::log(geom::unit_ball_volume(seq.extended(j)));
    log_factor -= std::log(geom::unit_ball_volume(seq.extended(j + 1)));
  }
  double log_bound = q * log_factor;
  for (const auto& f : fns) log_bound += std::log(l1_norm(f));
  return detail::finish_bound(std::move(lhs), std::exp(log_bound));
}

// ---------------------------------------------------------------------------
// Level-stack geometry: projection, rearrangement, layer-cake Phi_r
// ---------------------------------------------------------------------------

/// P_F f: project every level body into the subspace coordinates. Nesting is
/// preserved because projection is monotone.
inline LevelStackFn project_function(const LevelStackFn& f,
                                     const Eigen::Ref<const Eigen::MatrixXd>& frame) {
  std::vector<LevelStackFn::Level> levels;
  levels.reserve(static_cast<std::size_t>(f.size()));
  for (const auto& level : f.levels())
    levels.push_back({level.height, level.body.project_to(frame)});
  return LevelStackFn(std::move(levels));
}

/// Symmetric decreasing rearrangement: each level set becomes the centered
/// ball of equal volume. Idempotent, and layer-cake L1 mass is preserved.
inline LevelStackFn rearrange(const LevelStackFn& f) {
  std::vector<LevelStackFn::Level> levels;
  levels.reserve(static_cast<std::size_t>(f.size()));
  for (const auto& level : f.levels()) {
    const double r = level.body.volume_radius();
    if (!(r > 0.0)) continue;  // zero-volume level carries no layer-cake mass
    levels.push_back({level.height, Body::ball(level.body.dim(), r)});
  }
  return LevelStackFn(std::move(levels));
}

/// Layer-cake Phi_r of a quasi-concave function:
///   sum_i (t_i - t_{i+1}) Phi_r(K_i)
/// with one shared set of flag samples across levels. The standard error is
/// delta-method propagated through the per-level roots using the full
/// cross-level covariance of the shared samples.
inline Estimate phi_r_of_function(const LevelStackFn& f, const IndexSeq& seq,
                                  const RunOptions& opts) {
  if (f.dim() != seq.ambient())
    throw std::invalid_argument("function/index dimension mismatch");
  const int n = seq.ambient();
  const int m = f.size();
  const int top_dim = seq.extended(seq.rank());

  struct VectorMoments {
    Eigen::VectorXd sum;
    Eigen::MatrixXd cross;
    std::uint64_t count = 0;
    std::uint64_t rejected = 0;
    void init(int size) {
      if (sum.size() == 0) {
        sum = Eigen::VectorXd::Zero(size);
        cross = Eigen::MatrixXd::Zero(size, size);
      }
    }
    void merge(const VectorMoments& o) {
      if (o.count == 0) {
        rejected += o.rejected;
        return;
      }
      init(static_cast<int>(o.sum.size()));
      sum += o.sum;
      cross += o.cross;
      count += o.count;
      rejected += o.rejected;
    }
  };

  detail::Stopwatch watch;
  const auto acc = parallel_reduce<VectorMoments>(
      opts.samples, opts.threads, [&](VectorMoments& mom, std::uint64_t index) {
        StreamRng rng(opts.seed, index);
        const Eigen::MatrixXd basis = sample_orthogonal(n, rng).leftCols(top_dim);
        Eigen::VectorXd local(m);
        for (int i = 0; i < m; ++i) {
          double value = 1.0;
          for (int j = 1; j <= seq.rank(); ++j) {
            const double vol = f.levels()[static_cast<std::size_t>(i)].body.projection_volume(
                basis.leftCols(seq.extended(j)));
            if (!(vol >= detail::kDegenerateVolume)) {
              mom.rejected += 1;
              return;
            }
            value *= std::pow(vol, -static_cast<double>(seq.section_exponent(j)));
          }
          local(i) = value;
        }
        mom.init(m);
        mom.sum += local;
        mom.cross += local * local.transpose();
        mom.count += 1;
      });
  if (acc.count == 0) throw std::runtime_error("estimator produced no accepted samples");
  detail::check_reject_rate(ScalarMoments{0, 0, 0, 0, acc.count, acc.rejected}, opts.samples);

  const double count = static_cast<double>(acc.count);
  const Eigen::VectorXd mean = acc.sum / count;
  Eigen::MatrixXd cov = acc.cross / count - mean * mean.transpose();
  const double outer = -1.0 / static_cast<double>(seq.root_power());

  double total = 0.0;
  Eigen::VectorXd grad(m);
  for (int i = 0; i < m; ++i) {
    if (!(mean(i) > 0.0)) throw std::runtime_error("flag average is nonpositive at a level");
    total += f.weight(i) * std::pow(mean(i), outer);
    grad(i) = f.weight(i) * outer * std::pow(mean(i), outer - 1.0);
  }
  const double var = std::max(0.0, grad.dot(cov * grad)) / count;

  Estimate e;
  e.mean = total;
  e.std_error = std::sqrt(var);
  e.samples = opts.samples;
  e.seed = opts.seed;
  e.outer_power = outer;
  e.raw_mean = mean(0);
  e.raw_std_error = std::sqrt(std::max(0.0, cov(0, 0)) / count);
  e.rejected = acc.rejected;
  e.wall_time_ms = watch.ms();
  return e;
}

}  // namespace flagquer
