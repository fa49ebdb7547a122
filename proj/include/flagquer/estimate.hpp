#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace flagquer {

/// Monte Carlo result. `mean`/`std_error` describe the final quantity; when
/// an outer root-power was applied after averaging, `outer_power` records it
/// and `raw_mean`/`raw_std_error` keep the untransformed flag average. The
/// standard error of the transform is delta-method propagated.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double outer_power = 1.0;
  double raw_mean = 0.0;
  double raw_std_error = 0.0;
  double excess_kurtosis = 0.0;
  std::uint64_t rejected = 0;
  double wall_time_ms = 0.0;

  bool transformed() const noexcept { return outer_power != 1.0; }
};

/// Running power sums of a scalar statistic, mergeable across sample blocks.
struct ScalarMoments {
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  std::uint64_t count = 0;
  std::uint64_t rejected = 0;

  void add(double v) noexcept {
    const double v2 = v * v;
    s1 += v;
    s2 += v2;
    s3 += v2 * v;
    s4 += v2 * v2;
    ++count;
  }
  void reject() noexcept { ++rejected; }
  void merge(const ScalarMoments& o) noexcept {
    s1 += o.s1;
    s2 += o.s2;
    s3 += o.s3;
    s4 += o.s4;
    count += o.count;
    rejected += o.rejected;
  }

  double mean() const { return s1 / static_cast<double>(count); }

  double variance() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double m = mean();
    const double v = (s2 - n * m * m) / (n - 1.0);
    return v > 0.0 ? v : 0.0;
  }

  double std_error_of_mean() const {
    return std::sqrt(variance() / static_cast<double>(count));
  }

  /// Excess kurtosis of the sampled statistic; a tail-heaviness diagnostic
  /// for negative-exponent integrands.
  double excess_kurtosis() const {
    if (count < 4) return 0.0;
    const double n = static_cast<double>(count);
    const double m = mean();
    const double m2 = s2 / n - m * m;
    if (m2 <= 0.0) return 0.0;
    const double m4 = (s4 - 4.0 * m * s3 + 6.0 * m * m * s2) / n - 3.0 * m * m * m * m;
    return m4 / (m2 * m2) - 3.0;
  }
};

/// Close out a run: apply the outer power (if any) with delta-method SE,
/// SE(m^q) = |q| m^{q-1} SE(m).
inline Estimate finish_estimate(const ScalarMoments& acc, double outer_power,
                                std::uint64_t samples, std::uint64_t seed) {
  if (acc.count == 0) throw std::runtime_error("estimator produced no accepted samples");
  Estimate e;
  e.samples = samples;
  e.seed = seed;
  e.rejected = acc.rejected;
  e.raw_mean = acc.mean();
  e.raw_std_error = acc.std_error_of_mean();
  e.excess_kurtosis = acc.excess_kurtosis();
  e.outer_power = outer_power;
  if (outer_power == 1.0) {
    e.mean = e.raw_mean;
    e.std_error = e.raw_std_error;
  } else {
    if (e.raw_mean <= 0.0)
      throw std::runtime_error("flag average is nonpositive; outer power undefined");
    e.mean = std::pow(e.raw_mean, outer_power);
    e.std_error = std::abs(outer_power) * std::pow(e.raw_mean, outer_power - 1.0) *
                  e.raw_std_error;
  }
  return e;
}

}  // namespace flagquer
