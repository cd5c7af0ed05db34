#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "predictability/stats_compare.hpp"

using namespace predictability;

namespace {

std::vector<double> normals(std::size_t n, double mean, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mean, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

double density_at(const KernelDensity& k, double x) {
  for (std::size_t i = 1; i < k.grid.size(); ++i) {
    if (k.grid[i] >= x) {
      const double t = (x - k.grid[i - 1]) / (k.grid[i] - k.grid[i - 1]);
      return k.density[i - 1] + t * (k.density[i] - k.density[i - 1]);
    }
  }
  return 0.0;
}

}  // namespace

TEST(SummaryStats, Examples) {
  const std::vector<double> ones{1, 1, 1};
  EXPECT_DOUBLE_EQ(summary_stats(ones).mean, 1.0);
  EXPECT_DOUBLE_EQ(summary_stats(ones).sd, 0.0);
  const std::vector<double> two{0, 2};
  EXPECT_DOUBLE_EQ(summary_stats(two).mean, 1.0);
  EXPECT_DOUBLE_EQ(summary_stats(two).sd, std::sqrt(2.0));
  std::vector<double> jitter;
  for (int i = 0; i < 91; ++i) jitter.push_back(2.04 + 0.001 * ((i % 7) - 3));
  EXPECT_NEAR(summary_stats(jitter).mean, 2.04, 1e-3);
}

TEST(Kde, StandardNormalDensityAtZero) {
  const auto k = kde(normals(1000, 0.0, 1));
  EXPECT_EQ(k.grid.size(), kKdeGridSize);
  const double at_zero = density_at(k, 0.0);
  EXPECT_GE(at_zero, 0.36);
  EXPECT_LE(at_zero, 0.44);
}

TEST(Kde, MassIsOne) {
  const auto k = kde(normals(300, 0.0, 2));
  EXPECT_NEAR(trapezoid(k.grid, k.density), 1.0, 0.01);
}

TEST(Kde, TranslationEquivariance) {
  const auto a = normals(200, 0.0, 3);
  std::vector<double> b(a);
  for (auto& x : b) x += 7.25;
  const auto ka = kde(a), kb = kde(b);
  EXPECT_NEAR(ka.bandwidth, kb.bandwidth, 1e-12);
  for (std::size_t i = 0; i < ka.grid.size(); ++i) {
    EXPECT_NEAR(kb.grid[i] - ka.grid[i], 7.25, 1e-9);
    EXPECT_NEAR(kb.density[i], ka.density[i], 1e-9);
  }
}

TEST(Kde, Errors) {
  const std::vector<double> few{1, 2, 3, 4};
  EXPECT_THROW(kde(few), Error);
  const std::vector<double> flat(10, 1.0);
  EXPECT_THROW(kde(flat), Error);
}

TEST(DensityEqualityTest, IdenticalSamples) {
  const auto a = normals(50, 0.0, 4);
  const auto r = density_equality_test(a, a, 200, 1);
  EXPECT_NEAR(r.statistic, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(DensityEqualityTest, SeparatedSamples) {
  const auto r = density_equality_test(normals(200, 0.0, 5), normals(200, 5.0, 6), 500, 2);
  EXPECT_LT(r.p_value, 0.01);
}

TEST(DensityEqualityTest, StatisticMatchesNumericIntegral) {
  const auto a = normals(40, 0.0, 7), b = normals(60, 0.7, 8);
  const auto r = density_equality_test(a, b, 10, 3);
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto [lo, hi] = std::minmax_element(pooled.begin(), pooled.end());
  std::vector<double> grid;
  const std::size_t points = 20001;
  for (std::size_t i = 0; i < points; ++i) {
    grid.push_back(*lo - 8 * r.bandwidth + (*hi - *lo + 16 * r.bandwidth) * i / (points - 1.0));
  }
  const auto fa = kde_on_grid(a, r.bandwidth, grid), fb = kde_on_grid(b, r.bandwidth, grid);
  std::vector<double> sq(points);
  for (std::size_t i = 0; i < points; ++i) sq[i] = (fa[i] - fb[i]) * (fa[i] - fb[i]);
  EXPECT_NEAR(r.statistic, trapezoid(grid, sq), 1e-6 * r.statistic);
}

TEST(DensityEqualityTest, SymmetricInArguments) {
  const auto a = normals(30, 0.0, 9), b = normals(45, 0.4, 10);
  EXPECT_NEAR(density_equality_test(a, b, 5, 1).statistic, density_equality_test(b, a, 5, 1).statistic, 1e-12);
}

TEST(DensityEqualityTest, ReproducibleForSeed) {
  const auto a = normals(30, 0.0, 11), b = normals(30, 0.3, 12);
  EXPECT_EQ(density_equality_test(a, b, 300, 5).p_value, density_equality_test(a, b, 300, 5).p_value);
}

TEST(DensityEqualityTest, ReferenceBandBracketsPooledDensity) {
  const auto a = normals(80, 0.0, 13), b = normals(80, 0.0, 14);
  const auto r = density_equality_test(a, b, 50, 6);
  ASSERT_EQ(r.grid.size(), kKdeGridSize);
  std::size_t inside = 0;
  for (std::size_t g = 0; g < r.grid.size(); ++g) {
    const double pooled = 0.5 * (r.density_a[g] + r.density_b[g]);
    EXPECT_LE(r.reference_band_low[g], pooled + 1e-12);
    EXPECT_GE(r.reference_band_high[g], pooled - 1e-12);
    inside += r.density_a[g] >= r.reference_band_low[g] && r.density_a[g] <= r.reference_band_high[g];
  }
  EXPECT_GT(inside, r.grid.size() * 8 / 10);
}

TEST(DensityEqualityTest, NullPValuesRoughlyUniform) {
  int below05 = 0, below10 = 0;
  const int sims = 500;
  for (int s = 0; s < sims; ++s) {
    const auto a = normals(30, 0.0, 1000 + 2 * s), b = normals(30, 0.0, 1001 + 2 * s);
    const double p = density_equality_test(a, b, 99, static_cast<std::uint64_t>(s)).p_value;
    below05 += p < 0.05;
    below10 += p < 0.10;
  }
  EXPECT_NEAR(below05 / static_cast<double>(sims), 0.05, 0.05);
  EXPECT_NEAR(below10 / static_cast<double>(sims), 0.10, 0.05);
}

TEST(DensityEqualityTest, Errors) {
  const std::vector<double> ok{1, 2, 3, 4, 5, 6};
  const std::vector<double> few{1, 2};
  EXPECT_THROW(density_equality_test(ok, few), Error);
  EXPECT_THROW(density_equality_test(ok, ok, 0), Error);
}
