#pragma once

// Gaussian kernel densities and a permutation test for equality of two
// densities smoothed with a shared bandwidth.
//
// The test statistic is the integrated squared difference between the two
// densities over the real line. For Gaussian kernels it reduces to sums of a
// Gaussian with standard deviation h*sqrt(2) over pairwise differences, so a
// permutation only needs a relabeling of a precomputed Gram matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "predictability/error.hpp"

namespace predictability {

inline constexpr std::size_t kKdeGridSize = 512;
inline constexpr std::size_t kMinKdeSamples = 5;
inline constexpr int kDefaultPermutations = 1000;

struct KernelDensity {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

struct EqualityTestResult {
  double p_value = 1.0;
  double statistic = 0.0;
  double bandwidth = 0.0;
  int num_permutations = 0;
  std::vector<double> grid;
  std::vector<double> density_a;
  std::vector<double> density_b;
  std::vector<double> reference_band_low;
  std::vector<double> reference_band_high;
};

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;
};

inline SummaryStats summary_stats(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw Error(ErrorKind::too_short, "summary statistics need at least 2 samples");
  }
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

namespace detail {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double gaussian(double u, double h) {
  const double z = u / h;
  return kInvSqrt2Pi / h * std::exp(-0.5 * z * z);
}

// Linear-interpolation quantile (R type 7) of sorted data.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline void check_samples(std::span<const double> samples) {
  if (samples.size() < kMinKdeSamples) {
    throw Error(ErrorKind::too_short, "kernel density needs at least 5 samples");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw Error(ErrorKind::domain, "non-finite sample");
  }
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  std::vector<double> grid(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
  return grid;
}

}  // namespace detail

/// Normal-reference rule h = 0.9 min(sd, IQR/1.34) n^(-1/5); falls back to sd
/// when the IQR collapses.
inline double normal_reference_bandwidth(std::span<const double> samples) {
  detail::check_samples(samples);
  const double sd = summary_stats(samples).sd;
  if (!(sd > 0.0)) throw Error(ErrorKind::degenerate, "samples have zero variance");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = detail::sorted_quantile(sorted, 0.75) - detail::sorted_quantile(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

inline std::vector<double> kde_on_grid(std::span<const double> samples, double bandwidth,
                                       std::span<const double> grid) {
  std::vector<double> density(grid.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double s : samples) acc += detail::gaussian(grid[g] - s, bandwidth);
    density[g] = acc * inv_n;
  }
  return density;
}

/// Gaussian KDE on a 512-point grid over [min - 3h, max + 3h].
inline KernelDensity kde(std::span<const double> samples) {
  const double h = normal_reference_bandwidth(samples);
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  KernelDensity out;
  out.bandwidth = h;
  out.grid = detail::linear_grid(*lo - 3.0 * h, *hi + 3.0 * h, kKdeGridSize);
  out.density = kde_on_grid(samples, h, out.grid);
  return out;
}

inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double area = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) area += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return area;
}

namespace detail {

// Integrated squared difference between the KDEs of two index groups of the
// pooled sample, given the pooled Gram matrix G(i,j) = phi_{h sqrt 2}(z_i - z_j).
class SquaredDifference {
 public:
  SquaredDifference(std::span<const double> pooled, double bandwidth)
      : n_(pooled.size()), gram_(n_ * n_) {
    const double h2 = bandwidth * std::sqrt(2.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) gram_[i * n_ + j] = gaussian(pooled[i] - pooled[j], h2);
    }
  }

  double operator()(std::span<const std::size_t> a, std::span<const std::size_t> b) const {
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    return cross(a, a) / (na * na) + cross(b, b) / (nb * nb) - 2.0 * cross(a, b) / (na * nb);
  }

  double scale() const {
    return std::accumulate(gram_.begin(), gram_.end(), 0.0) / static_cast<double>(n_ * n_);
  }

 private:
  double cross(std::span<const std::size_t> u, std::span<const std::size_t> v) const {
    double acc = 0.0;
    for (std::size_t i : u) {
      const double* row = gram_.data() + i * n_;
      for (std::size_t j : v) acc += row[j];
    }
    return acc;
  }

  std::size_t n_;
  std::vector<double> gram_;
};

}  // namespace detail

/// Permutation test for equality of two kernel densities. The p-value is
/// (1 + #{T_perm >= T_obs}) / (1 + B). The reference band is the pooled
/// density +/- 2 exact permutation standard errors of a group density (the
/// larger of the two groups' errors), so both densities fall inside it under
/// the null.
inline EqualityTestResult density_equality_test(std::span<const double> a,
                                                std::span<const double> b,
                                                int num_permutations = kDefaultPermutations,
                                                std::uint64_t seed = 0) {
  detail::check_samples(a);
  detail::check_samples(b);
  if (num_permutations < 1) throw Error(ErrorKind::validation, "need at least one permutation");

  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double h = normal_reference_bandwidth(pooled);
  const std::size_t na = a.size();
  const std::size_t total = pooled.size();

  detail::SquaredDifference isd(pooled, h);
  std::vector<std::size_t> labels(total);
  std::iota(labels.begin(), labels.end(), std::size_t{0});
  const std::span<const std::size_t> all(labels);

  EqualityTestResult r;
  r.bandwidth = h;
  r.num_permutations = num_permutations;
  r.statistic = std::max(0.0, isd(all.first(na), all.subspan(na)));

  // Rounding noise in the Gram sums must not count as a strict exceedance.
  const double tolerance = 1e-12 * isd.scale();
  std::mt19937_64 rng(seed);
  std::size_t exceed = 0;
  for (int p = 0; p < num_permutations; ++p) {
    std::shuffle(labels.begin(), labels.end(), rng);
    if (isd(all.first(na), all.subspan(na)) >= r.statistic - tolerance) ++exceed;
  }
  r.p_value = static_cast<double>(exceed + 1) / static_cast<double>(num_permutations + 1);

  const auto [lo, hi] = std::minmax_element(pooled.begin(), pooled.end());
  r.grid = detail::linear_grid(*lo - 3.0 * h, *hi + 3.0 * h, kKdeGridSize);
  r.density_a = kde_on_grid(a, h, r.grid);
  r.density_b = kde_on_grid(b, h, r.grid);

  // Sampling without replacement: Var(mean of k draws) = s2/k * (N-k)/(N-1).
  const double nd = static_cast<double>(total);
  const std::size_t smaller = std::min(na, total - na);
  const double k = static_cast<double>(smaller);
  const double fpc = (nd - k) / (nd - 1.0);
  r.reference_band_low.resize(r.grid.size());
  r.reference_band_high.resize(r.grid.size());
  for (std::size_t g = 0; g < r.grid.size(); ++g) {
    double sum = 0.0, sum_sq = 0.0;
    for (double z : pooled) {
      const double kz = detail::gaussian(r.grid[g] - z, h);
      sum += kz;
      sum_sq += kz * kz;
    }
    const double mean = sum / nd;
    const double var = std::max(0.0, sum_sq / nd - mean * mean);
    const double se = std::sqrt(var / k * fpc);
    r.reference_band_low[g] = mean - 2.0 * se;
    r.reference_band_high[g] = mean + 2.0 * se;
  }
  return r;
}

}  // namespace predictability
