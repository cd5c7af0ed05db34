#pragma once

// BDS test of the iid hypothesis on real-valued series, and the rank
// association between entropy estimates and |BDS|.
//
// With I(s,t) = 1{|x_s - x_t| <= eps}, C = C_1(eps) on the full sample and
// K = mean over distinct triples of I(i,j) I(i,k):
//
//   V_m = sqrt(N) (C_m - C_1^m) / sigma_m,   N = n - m + 1
//   sigma_m^2 = 4 [K^m + 2 sum_{j=1}^{m-1} K^(m-j) C^(2j)
//                  + (m-1)^2 C^(2m) - m^2 K C^(2m-2)]
//
// C_m and C_1 in the numerator are taken over the same N trailing points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "predictability/error.hpp"
#include "predictability/series_model.hpp"

namespace predictability {

inline constexpr std::size_t kMinBdsLength = 50;

struct BdsParams {
  int embedding_m = 2;
  double epsilon_multiplier = 1.0;
};

struct BdsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double c_m = 0.0;
  double c_1 = 0.0;
  double k = 0.0;
  double epsilon = 0.0;
  BdsParams params;
  std::size_t n = 0;
};

inline double sample_standard_deviation(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

inline double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

/// Fraction of pairs s < t of m-histories within eps under the max norm.
inline double correlation_integral(std::span<const double> values, int m, double epsilon) {
  if (m < 1) throw Error(ErrorKind::validation, "embedding dimension must be >= 1");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::validation, "epsilon must be positive");
  const std::size_t mm = static_cast<std::size_t>(m);
  if (values.size() < mm + 1) {
    throw Error(ErrorKind::too_short, "correlation integral needs at least m + 1 values");
  }
  const std::size_t count = values.size() - mm + 1;
  std::size_t close = 0;
  for (std::size_t s = 0; s + 1 < count; ++s) {
    for (std::size_t t = s + 1; t < count; ++t) {
      std::size_t k = 0;
      while (k < mm && std::abs(values[s + k] - values[t + k]) <= epsilon) ++k;
      if (k == mm) ++close;
    }
  }
  const double pairs = static_cast<double>(count) * static_cast<double>(count - 1) / 2.0;
  return static_cast<double>(close) / pairs;
}

inline double correlation_integral(const ReturnSeries& values, int m, double epsilon) {
  return correlation_integral(std::span<const double>(values.values), m, epsilon);
}

inline BdsResult bds_statistic(std::span<const double> values, const BdsParams& params) {
  const int m = params.embedding_m;
  if (m < 2 || m > 10) throw Error(ErrorKind::validation, "BDS embedding must be in [2, 10]");
  if (!(params.epsilon_multiplier > 0.0)) {
    throw Error(ErrorKind::validation, "BDS epsilon multiplier must be positive");
  }
  const std::size_t n = values.size();
  if (n < kMinBdsLength) {
    throw Error(ErrorKind::too_short, "BDS needs at least 50 observations");
  }
  const double sd = sample_standard_deviation(values);
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    throw Error(ErrorKind::degenerate, "BDS input has zero variance");
  }
  const double eps = params.epsilon_multiplier * sd;

  // Row sums of the indicator matrix (self included) give C and K in one pass.
  std::vector<double> row(n, 1.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(values[i] - values[j]) <= eps) {
        row[i] += 1.0;
        row[j] += 1.0;
      }
    }
  }
  const double nd = static_cast<double>(n);
  double total = 0.0;
  double total_sq = 0.0;
  for (double r : row) {
    total += r;
    total_sq += r * r;
  }
  const double c = (total - nd) / (nd * (nd - 1.0));
  const double k = (total_sq - 3.0 * total + 2.0 * nd) / (nd * (nd - 1.0) * (nd - 2.0));

  const auto tail = values.subspan(static_cast<std::size_t>(m - 1));
  const double c1 = correlation_integral(tail, 1, eps);
  const double cm = correlation_integral(values, m, eps);

  const double md = m;
  double cross = 0.0;
  for (int j = 1; j < m; ++j) {
    cross += std::pow(k, m - j) * std::pow(c, 2 * j);
  }
  const double variance = 4.0 * (std::pow(k, m) + 2.0 * cross +
                                 (md - 1.0) * (md - 1.0) * std::pow(c, 2 * m) -
                                 md * md * k * std::pow(c, 2 * m - 2));
  if (!(variance > 0.0)) {
    throw Error(ErrorKind::degenerate, "BDS asymptotic variance is not positive");
  }

  BdsResult r;
  const double big_n = static_cast<double>(n - static_cast<std::size_t>(m) + 1);
  r.statistic = std::sqrt(big_n) * (cm - std::pow(c1, m)) / std::sqrt(variance);
  r.p_value = normal_two_sided_p(r.statistic);
  r.c_m = cm;
  r.c_1 = c1;
  r.k = k;
  r.epsilon = eps;
  r.params = params;
  r.n = n;
  return r;
}

inline BdsResult bds_statistic(const ReturnSeries& values, const BdsParams& params) {
  return bds_statistic(std::span<const double>(values.values), params);
}

/// Average ranks, 1-based; ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw Error(ErrorKind::degenerate, "correlation undefined for a constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::length_mismatch, "rank correlation needs equal lengths");
  }
  if (x.size() < 3) throw Error(ErrorKind::too_short, "rank correlation needs >= 3 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson_correlation(rx, ry);
}

/// Spearman correlation between entropy estimates and |BDS|.
inline double entropy_bds_association(std::span<const double> entropies,
                                      std::span<const double> bds_stats) {
  std::vector<double> magnitude(bds_stats.size());
  std::transform(bds_stats.begin(), bds_stats.end(), magnitude.begin(),
                 [](double v) { return std::abs(v); });
  return spearman_correlation(entropies, magnitude);
}

}  // namespace predictability
