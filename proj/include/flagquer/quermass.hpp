#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "flagquer/body.hpp"
#include "flagquer/estimate.hpp"
#include "flagquer/indices.hpp"
#include "flagquer/parallel.hpp"
#include "flagquer/sampler.hpp"

namespace flagquer {

enum class VolumeMode { sections, projections };

/// How to realize the flag measure: one Haar matrix with prefix columns, or a
/// nested chain through the complete flag (the trivial-extension route).
enum class FlagRoute { direct, via_complete };

struct RunOptions {
  std::uint64_t samples = 200000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: FLAGQUER_THREADS env, then hardware
  FlagRoute route = FlagRoute::direct;
};

/// A flag-averaged product statistic: one (subspace dimension, exponent) pair
/// per factor, dimensions strictly increasing.
struct FlagStatistic {
  std::vector<int> dims;
  std::vector<double> exps;
};

namespace detail {

constexpr double kDegenerateVolume = 1e-12;
constexpr double kMaxRejectFraction = 1e-4;

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_ = clock::now();
};

inline void check_reject_rate(const ScalarMoments& acc, std::uint64_t samples) {
  if (acc.rejected > kMaxRejectFraction * static_cast<double>(samples))
    throw std::runtime_error(
        "degenerate sample rate exceeds 0.01%; integrand unstable for this body");
}

}  // namespace detail

/// Core estimator: mean over Haar flags of
///   prod_j vol(dims[j])^exps[j]           (sections or projections),
/// optionally raised per sample to `per_sample_power`, then raised to
/// `outer_power` after averaging (delta-method SE). Samples with a required
/// volume below 1e-12 are rejected and counted; the run errors out if the
/// reject rate tops 0.01%.
inline Estimate flag_power_average(const Body& body, const FlagStatistic& stat,
                                   VolumeMode mode, double outer_power,
                                   const RunOptions& opts,
                                   double per_sample_power = 1.0) {
  const int n = body.dim();
  if (stat.dims.size() != stat.exps.size())
    throw std::invalid_argument("statistic dims/exps size mismatch");
  for (std::size_t j = 0; j < stat.dims.size(); ++j) {
    if (stat.dims[j] < 1 || stat.dims[j] >= n)
      throw std::invalid_argument("statistic dimension out of range");
    if (j + 1 < stat.dims.size() && stat.dims[j] >= stat.dims[j + 1])
      throw std::invalid_argument("statistic dimensions must be strictly increasing");
  }
  bool has_negative = false;
  for (double e : stat.exps)
    if (e < 0.0) has_negative = true;
  if (mode == VolumeMode::sections && has_negative && !body.origin_interior())
    throw std::domain_error("interior required: negative section exponents need 0 in the interior");

  detail::Stopwatch watch;
  const int top_dim = stat.dims.back();
  const auto acc = parallel_reduce<ScalarMoments>(
      opts.samples, opts.threads, [&](ScalarMoments& m, std::uint64_t index) {
        StreamRng rng(opts.seed, index);
        Eigen::MatrixXd direct_basis;     // prefix-column route
        std::vector<Frame> chain_frames;  // nested-chain route
        if (opts.route == FlagRoute::direct)
          direct_basis = sample_orthogonal(n, rng).leftCols(top_dim);
        else
          chain_frames = sample_complete_flag_nested(n, rng).frames;
        double value = 1.0;
        bool ok = true;
        for (std::size_t j = 0; j < stat.dims.size(); ++j) {
          if (stat.exps[j] == 0.0) continue;
          const int d = stat.dims[j];
          const Eigen::Ref<const Eigen::MatrixXd> frame =
              opts.route == FlagRoute::direct
                  ? direct_basis.leftCols(d)
                  : Eigen::Ref<const Eigen::MatrixXd>(
                        chain_frames[static_cast<std::size_t>(d - 1)].basis);
          const double vol = mode == VolumeMode::sections ? body.section_volume(frame)
                                                          : body.projection_volume(frame);
          if (!(vol >= detail::kDegenerateVolume)) {
            ok = false;
            break;
          }
          value *= std::pow(vol, stat.exps[j]);
        }
        if (!ok || !std::isfinite(value)) {
          m.reject();
          return;
        }
        if (per_sample_power != 1.0) value = std::pow(value, per_sample_power);
        m.add(value);
      });
  detail::check_reject_rate(acc, opts.samples);
  Estimate e = finish_estimate(acc, outer_power, opts.samples, opts.seed);
  e.wall_time_ms = watch.ms();
  return e;
}

namespace detail {

inline FlagStatistic section_statistic(const IndexSeq& seq, double sign) {
  FlagStatistic stat;
  stat.dims = seq.indices();
  stat.exps.reserve(stat.dims.size());
  for (int j = 1; j <= seq.rank(); ++j)
    stat.exps.push_back(sign * seq.section_exponent(j));
  return stat;
}

inline FlagStatistic omega_statistic(const Permutation& perm, double sign) {
  FlagStatistic stat;
  const int n = perm.size();
  for (int j = 1; j < n; ++j) {
    stat.dims.push_back(j);
    stat.exps.push_back(sign * perm.delta(j));
  }
  return stat;
}

}  // namespace detail

/// Dual r-flag quermassintegral (E[prod |L ∩ F_j|^{i_{j+1}-i_{j-1}}])^{1/(i_r n)}.
inline Estimate psi_r(const Body& body, const IndexSeq& seq, const RunOptions& opts) {
  if (seq.ambient() != body.dim()) throw std::invalid_argument("index sequence dimension mismatch");
  return flag_power_average(body, detail::section_statistic(seq, +1.0), VolumeMode::sections,
                            1.0 / static_cast<double>(seq.root_power()), opts);
}

/// r-flag quermassintegral (E[prod |P_{F_j} L|^{i_{j-1}-i_{j+1}}])^{-1/(i_r n)}.
inline Estimate phi_r(const Body& body, const IndexSeq& seq, const RunOptions& opts) {
  if (seq.ambient() != body.dim()) throw std::invalid_argument("index sequence dimension mismatch");
  return flag_power_average(body, detail::section_statistic(seq, -1.0), VolumeMode::projections,
                            -1.0 / static_cast<double>(seq.root_power()), opts);
}

/// ω-flag dual quermassintegral over the complete flag; 1-homogeneous with the
/// outer root when ω(n) != n, the raw 0-homogeneous average otherwise.
inline Estimate psi_omega(const Body& body, const Permutation& perm, const RunOptions& opts) {
  const int n = perm.size();
  if (n != body.dim()) throw std::invalid_argument("permutation dimension mismatch");
  const double outer =
      perm.fixes_top() ? 1.0 : 1.0 / static_cast<double>(n) / (n - perm.at(n));
  return flag_power_average(body, detail::omega_statistic(perm, +1.0), VolumeMode::sections,
                            outer, opts);
}

inline Estimate phi_omega(const Body& body, const Permutation& perm, const RunOptions& opts) {
  const int n = perm.size();
  if (n != body.dim()) throw std::invalid_argument("permutation dimension mismatch");
  const double outer =
      perm.fixes_top() ? 1.0 : -1.0 / static_cast<double>(n) / (n - perm.at(n));
  return flag_power_average(body, detail::omega_statistic(perm, -1.0), VolumeMode::projections,
                            outer, opts);
}

/// Complete-flag quantities; by construction these are the ω-flag quantities
/// at the reversal permutation (all increments equal 2).
inline Estimate psi_full(const Body& body, const RunOptions& opts) {
  return psi_omega(body, Permutation::reversal(body.dim()), opts);
}

inline Estimate phi_full(const Body& body, const RunOptions& opts) {
  return phi_omega(body, Permutation::reversal(body.dim()), opts);
}

/// Exact value of Psi_r = Phi_r on a centered ball: sections and projections
/// through the center are balls, so the flag average is constant.
inline double ball_closed_form(const IndexSeq& seq, double radius) {
  double log_prod = 0.0;
  for (int j = 1; j <= seq.rank(); ++j)
    log_prod += seq.section_exponent(j) *
                std::log(geom::unit_ball_volume(seq.extended(j)));
  return radius * std::exp(log_prod / static_cast<double>(seq.root_power()));
}

/// Ball value for a general exponent profile over given dimensions with an
/// explicit outer power: (prod omega_d^e)^{outer} * radius^{outer * sum d e}.
inline double ball_closed_form(const std::vector<int>& dims, const std::vector<double>& exps,
                               double outer_power, double radius) {
  double log_prod = 0.0;
  double degree = 0.0;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    log_prod += exps[j] * std::log(geom::unit_ball_volume(dims[j]));
    degree += dims[j] * exps[j];
  }
  return std::exp(outer_power * (log_prod + degree * std::log(radius)));
}

/// Ball value of the ω-flag dual quermassintegral.
inline double ball_closed_form_omega(const Permutation& perm, double radius) {
  const int n = perm.size();
  std::vector<int> dims;
  std::vector<double> exps;
  for (int j = 1; j < n; ++j) {
    dims.push_back(j);
    exps.push_back(perm.delta(j));
  }
  const double outer =
      perm.fixes_top() ? 1.0 : 1.0 / static_cast<double>(n) / (n - perm.at(n));
  return ball_closed_form(dims, exps, outer, radius);
}

/// Exact Psi_r of an ellipsoid: linear invariance reduces it to the ball of
/// the same volume radius.
inline double ellipsoid_oracle_psi(const Body& body, const IndexSeq& seq) {
  if (body.kind() != Body::Kind::ball && body.kind() != Body::Kind::ellipsoid)
    throw std::invalid_argument("oracle applies to balls and ellipsoids");
  return ball_closed_form(seq, body.volume_radius());
}

// ---------------------------------------------------------------------------
// Worked example on S^2: the functional A(d1,d2,d3)
// ---------------------------------------------------------------------------

namespace detail {

inline double example2_integrand(double x, double y, double z, double d1, double d2,
                                 double d3) {
  const double num = d1 * std::sqrt(std::max(0.0, 1.0 - x * x)) +
                     d2 * std::sqrt(std::max(0.0, 1.0 - y * y)) +
                     d3 * std::sqrt(std::max(0.0, 1.0 - z * z));
  const double den = std::abs(x) / d1 + std::abs(y) / d2 + std::abs(z) / d3;
  return num / (den * den);
}

inline void check_unit_product(double d1, double d2, double d3) {
  if (!(d1 > 0.0 && d2 > 0.0 && d3 > 0.0) || std::abs(d1 * d2 * d3 - 1.0) > 1e-9)
    throw std::invalid_argument("d1*d2*d3 must equal 1");
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

}  // namespace detail

/// Monte Carlo estimate of A(d) = ∫_{S²} [Σ d_i √(1-φ_i²)] / [Σ |φ_j|/d_j]² dσ.
inline Estimate example2_A(double d1, double d2, double d3, const RunOptions& opts) {
  detail::check_unit_product(d1, d2, d3);
  detail::Stopwatch watch;
  const auto acc = parallel_reduce<ScalarMoments>(
      opts.samples, opts.threads, [&](ScalarMoments& m, std::uint64_t index) {
        StreamRng rng(opts.seed, index);
        const Eigen::VectorXd phi = sample_sphere(3, rng);
        m.add(detail::example2_integrand(phi(0), phi(1), phi(2), d1, d2, d3));
      });
  Estimate e = finish_estimate(acc, 1.0, opts.samples, opts.seed);
  e.wall_time_ms = watch.ms();
  return e;
}

/// Deterministic quadrature oracle for A(d): Gauss-Legendre product rule on
/// one octant in spherical coordinates (the integrand's kinks all lie on the
/// octant boundaries, so convergence is spectral), unfolded by symmetry.
inline double example2_a_quadrature(double d1, double d2, double d3,
                                    int nodes_per_axis = 1024) {
  detail::check_unit_product(d1, d2, d3);
  std::vector<double> t, wt;
  detail::gauss_legendre(nodes_per_axis, t, wt);
  const double quarter = 0.25 * std::numbers::pi;
  double total = 0.0;
  for (int i = 0; i < nodes_per_axis; ++i) {
    const double theta = (t[static_cast<std::size_t>(i)] + 1.0) * quarter;
    const double st = std::sin(theta), ct = std::cos(theta);
    double row = 0.0;
    for (int j = 0; j < nodes_per_axis; ++j) {
      const double lambda = (t[static_cast<std::size_t>(j)] + 1.0) * quarter;
      row += wt[static_cast<std::size_t>(j)] *
             detail::example2_integrand(st * std::cos(lambda), st * std::sin(lambda), ct,
                                        d1, d2, d3);
    }
    total += wt[static_cast<std::size_t>(i)] * st * row;
  }
  total *= quarter * quarter;   // jacobian of both affine maps to [0, pi/2]
  return 8.0 * total / (4.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------
// Cross-identity for ω = (1,3,2) in R³
// ---------------------------------------------------------------------------

/// A 1-dimensional projection volume is the full width h(θ) + h(-θ); averaging
/// it over lines gives twice the spherical mean of the support function. This
/// constant pins that width convention for the sphere-integral route.
inline constexpr double kFullWidthFactor = 2.0;

struct SphereIdentityResult {
  Estimate flag_side;    // E[|P_{F1}L| |P_{F2}L|^{-2}] over complete flags
  Estimate sphere_side;  // ∫ 2 W(P_{φ⊥}L) / |P_{φ⊥}L|² dσ(φ)
};

/// Both routes to Φ_ω^{-3}(L) for ω = (1,3,2): the raw complete-flag average
/// and the S² integral of shadow mean width over squared shadow area.
inline SphereIdentityResult phi_omega_sphere_identity(const Body& body,
                                                      const RunOptions& opts) {
  if (body.dim() != 3)
    throw std::invalid_argument("the sphere identity is specific to dimension 3");
  SphereIdentityResult out;
  FlagStatistic stat;
  stat.dims = {1, 2};
  stat.exps = {1.0, -2.0};
  out.flag_side = flag_power_average(body, stat, VolumeMode::projections, 1.0, opts);

  detail::Stopwatch watch;
  const auto acc = parallel_reduce<ScalarMoments>(
      opts.samples, opts.threads, [&](ScalarMoments& m, std::uint64_t index) {
        StreamRng rng(opts.seed + 0x51D3, index);
        const Eigen::VectorXd phi = sample_sphere(3, rng);
        const auto [area, width] = body.shadow_area_and_mean_width(phi);
        if (!(area >= detail::kDegenerateVolume)) {
          m.reject();
          return;
        }
        m.add(kFullWidthFactor * width / (area * area));
      });
  detail::check_reject_rate(acc, opts.samples);
  out.sphere_side = finish_estimate(acc, 1.0, opts.samples, opts.seed);
  out.sphere_side.wall_time_ms = watch.ms();
  return out;
}

}  // namespace flagquer
