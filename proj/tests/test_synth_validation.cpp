#include <gtest/gtest.h>

#include <cmath>

#include "predictability/synth_validation.hpp"
#include "predictability/synthetic_market.hpp"

using namespace predictability;

TEST(Generate, ConstantSource) {
  const auto s = generate({SourceKind::constant, 4, std::nullopt, 1}, 5);
  EXPECT_EQ(s, SymbolSequence(4, {0, 0, 0, 0, 0}));
}

TEST(Generate, UniformFrequencies) {
  const auto s = generate({SourceKind::uniform_iid, 4, std::nullopt, 2013}, 1000000);
  std::vector<double> freq(4, 0.0);
  for (Symbol c : s.symbols()) freq[c] += 1.0;
  for (double f : freq) EXPECT_NEAR(f / 1e6, 0.25, 0.002);
}

TEST(Generate, StickyChainHasLongRuns) {
  TransitionMatrix t{2, {0.99, 0.01, 0.01, 0.99}};
  const auto s = generate({SourceKind::markov, 2, t, 3}, 10000);
  std::size_t switches = 0;
  for (std::size_t i = 1; i < s.size(); ++i) switches += s[i] != s[i - 1];
  EXPECT_LT(switches, 200u);
}

TEST(Generate, SeedDeterminism) {
  const SyntheticSource src{SourceKind::markov, 4, mixed_cycle_chain(4, 0.3), 42};
  EXPECT_EQ(generate(src, 5000), generate(src, 5000));
  SyntheticSource other = src;
  other.seed = 43;
  EXPECT_NE(generate(src, 5000), generate(other, 5000));
}

TEST(Generate, Errors) {
  EXPECT_THROW(generate({SourceKind::markov, 4, std::nullopt, 1}, 10), Error);
  EXPECT_THROW(generate({SourceKind::markov, 3, mixed_cycle_chain(4, 0.5), 1}, 10), Error);
  EXPECT_THROW(generate({SourceKind::uniform_iid, 4, std::nullopt, 1}, 0), Error);
}

TEST(MarkovEntropyRate, Examples) {
  TransitionMatrix uniform{4, std::vector<double>(16, 0.25)};
  EXPECT_NEAR(markov_entropy_rate(uniform), 2.0, 1e-12);
  EXPECT_NEAR(markov_entropy_rate(mixed_cycle_chain(4, 0.0)), 0.0, 1e-12);
  TransitionMatrix flip{2, {0.9, 0.1, 0.1, 0.9}};
  const double h01 = -(0.1 * std::log2(0.1) + 0.9 * std::log2(0.9));
  EXPECT_NEAR(markov_entropy_rate(flip), h01, 1e-12);
  EXPECT_NEAR(h01, 0.4690, 1e-4);
}

TEST(MarkovEntropyRate, StationaryDistributionOfAsymmetricChain) {
  TransitionMatrix t{2, {0.7, 0.3, 0.2, 0.8}};
  const auto mu = stationary_distribution(t);
  EXPECT_NEAR(mu[0], 0.4, 1e-12);
  EXPECT_NEAR(mu[1], 0.6, 1e-12);
}

TEST(MarkovEntropyRate, Errors) {
  EXPECT_THROW(markov_entropy_rate({2, {0.5, 0.6, 0.5, 0.5}}), Error);
  EXPECT_THROW(markov_entropy_rate({2, {1.0, 0.0, 0.0, 1.0}}), Error);  // reducible
  EXPECT_THROW(markov_entropy_rate({2, {1.0, 0.0}}), Error);
}

TEST(ChainWithEntropy, HitsTarget) {
  for (double h : {0.25, 0.5, 1.0, 1.5, 1.9, 2.0}) {
    EXPECT_NEAR(markov_entropy_rate(chain_with_entropy(4, h)), h, 1e-9);
  }
  EXPECT_THROW(chain_with_entropy(4, 2.1), Error);
}

TEST(ConvergenceCurve, ConstantSourceStrictlyDecreasing) {
  const std::vector<std::size_t> sizes{100, 1000, 10000};
  const auto c = convergence_curve({SourceKind::constant, 4, std::nullopt, 1}, sizes, 2);
  EXPECT_EQ(c.true_entropy, 0.0);
  EXPECT_GT(c.estimates_lz[0], c.estimates_lz[1]);
  EXPECT_GT(c.estimates_lz[1], c.estimates_lz[2]);
  EXPECT_GT(c.estimates_ctw[0], c.estimates_ctw[1]);
  EXPECT_GT(c.estimates_ctw[1], c.estimates_ctw[2]);
}

TEST(ConvergenceCurve, UniformCtwNoWorseAtLargerSample) {
  const std::vector<std::size_t> sizes{4000, 10000};
  const auto c = convergence_curve({SourceKind::uniform_iid, 4, std::nullopt, 2013}, sizes, 10);
  EXPECT_EQ(c.true_entropy, 2.0);
  EXPECT_LE(std::abs(c.estimates_ctw[1] - 2.0), std::abs(c.estimates_ctw[0] - 2.0));
  EXPECT_GE(c.estimates_ctw[1], c.estimates_lz[1]);
}

TEST(ConvergenceCurve, Errors) {
  const SyntheticSource src{SourceKind::uniform_iid, 4, std::nullopt, 1};
  const std::vector<std::size_t> small{5, 100};
  const std::vector<std::size_t> unordered{200, 100};
  const std::vector<std::size_t> ok{100};
  EXPECT_THROW(convergence_curve(src, small, 1), Error);
  EXPECT_THROW(convergence_curve(src, unordered, 1), Error);
  EXPECT_THROW(convergence_curve(src, ok, 0), Error);
}

TEST(SyntheticMarket, ShapeAndDeterminism) {
  SyntheticMarketParams p;
  p.tickers = 12;
  p.daily_prices = 300;
  p.sessions = 2;
  const auto a = generate_market(p);
  const auto b = generate_market(p);
  ASSERT_EQ(a.daily.size(), 12u);
  ASSERT_EQ(a.intraday.size(), 12u);
  EXPECT_EQ(a.daily[0].points.size(), 300u);
  EXPECT_EQ(a.intraday[0].points.size(), 2 * p.prices_per_session);
  for (std::size_t i = 0; i < a.daily.size(); ++i) {
    ASSERT_EQ(a.daily[i].points.size(), b.daily[i].points.size());
    for (std::size_t t = 0; t < a.daily[i].points.size(); ++t) {
      ASSERT_EQ(a.daily[i].points[t].price, b.daily[i].points[t].price);
    }
    EXPECT_LE(a.daily_entropy.at(a.daily[i].ticker), 2.0);
  }
  // Weekends never appear among daily stamps.
  for (const auto& pt : a.daily[0].points) {
    const auto dow = ((pt.timestamp / 86400) % 7 + 11) % 7;
    EXPECT_NE(dow, 0);
    EXPECT_NE(dow, 6);
  }
}
