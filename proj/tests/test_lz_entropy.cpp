#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "predictability/lz_entropy.hpp"

using namespace predictability;

namespace {

SymbolSequence from_string(const std::string& s, int alphabet = 2) {
  std::vector<Symbol> v;
  for (char c : s) v.push_back(static_cast<Symbol>(c - '0'));
  return SymbolSequence(alphabet, v);
}

std::vector<std::uint32_t> raw(const SymbolSequence& s) {
  return {s.symbols().begin(), s.symbols().end()};
}

}  // namespace

TEST(Lz76Complexity, WorkedExample) {
  const auto parse = lz76_complexity(from_string("101001010010111110"));
  EXPECT_EQ(parse.complexity, 8u);
  const std::vector<std::size_t> lengths{1, 1, 2, 2, 3, 4, 2, 3};
  ASSERT_EQ(parse.phrases.size(), lengths.size());
  std::size_t start = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    EXPECT_EQ(parse.phrases[i].start, start);
    EXPECT_EQ(parse.phrases[i].length, lengths[i]);
    start += lengths[i];
  }
}

TEST(Lz76Complexity, SmallCases) {
  EXPECT_EQ(lz76_complexity(from_string("0")).complexity, 1u);
  EXPECT_EQ(lz76_complexity(from_string("00")).complexity, 2u);
  EXPECT_EQ(lz76_complexity(from_string("01")).complexity, 2u);
}

TEST(Lz76Complexity, PhrasesTileTheInput) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<Symbol> sym(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Symbol> v(200);
    for (auto& s : v) s = sym(rng);
    const auto parse = lz76_complexity(SymbolSequence(4, v));
    std::size_t pos = 0;
    for (const auto& ph : parse.phrases) {
      ASSERT_EQ(ph.start, pos);
      ASSERT_GE(ph.length, 1u);
      pos += ph.length;
    }
    EXPECT_EQ(pos, v.size());
    EXPECT_EQ(parse.complexity, parse.phrases.size());
  }
}

TEST(MatchLengths, Examples) {
  EXPECT_EQ(match_lengths(from_string("0000")).lambdas, (std::vector<std::size_t>{1, 2, 3, 2}));
  EXPECT_EQ(match_lengths(from_string("01")).lambdas, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(match_lengths(from_string("0101")).lambdas, (std::vector<std::size_t>{1, 1, 3, 2}));
}

TEST(MatchLengths, MatchesBruteForceOnRandomLongerInputs) {
  std::mt19937_64 rng(99);
  for (int a : {2, 3, 4, 8}) {
    std::uniform_int_distribution<Symbol> sym(0, static_cast<Symbol>(a - 1));
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<Symbol> v(static_cast<std::size_t>(20 + trial * 3));
      for (auto& s : v) s = sym(rng);
      const SymbolSequence s(a, v);
      ASSERT_EQ(match_lengths(s).lambdas, oracle::match_lengths(raw(s)));
    }
  }
}

TEST(LzEntropyRate, Examples) {
  EXPECT_DOUBLE_EQ(lz_entropy_rate(from_string("0000")).bits_per_symbol, 1.0);
  EXPECT_THROW(lz_entropy_rate(from_string("0")), Error);
  const auto est = lz_entropy_rate(from_string("0101"));
  EXPECT_EQ(est.estimator, Estimator::lz);
  EXPECT_EQ(est.sample_size, 4u);
}

TEST(LzEntropyRate, ConstantSequenceStrictlyDecreasing) {
  double prev = lz_entropy_rate(SymbolSequence(4, std::vector<Symbol>(4, 0))).bits_per_symbol;
  for (std::size_t n = 5; n <= 400; ++n) {
    const double cur = lz_entropy_rate(SymbolSequence(4, std::vector<Symbol>(n, 0))).bits_per_symbol;
    ASSERT_LT(cur, prev) << n;
    prev = cur;
  }
  EXPECT_LE(lz_entropy_rate(SymbolSequence(4, std::vector<Symbol>(10000, 0))).bits_per_symbol, 0.05);
}

TEST(LzEntropyRate, RelabelingInvariance) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<Symbol> sym(0, 3);
  std::vector<Symbol> perm{0, 1, 2, 3};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Symbol> v(500);
    for (auto& s : v) s = sym(rng);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Symbol> w(v.size());
    std::transform(v.begin(), v.end(), w.begin(), [&](Symbol s) { return perm[s]; });
    const SymbolSequence a(4, v), b(4, w);
    EXPECT_EQ(match_lengths(a).lambdas, match_lengths(b).lambdas);
    EXPECT_EQ(lz_entropy_rate(a).bits_per_symbol, lz_entropy_rate(b).bits_per_symbol);
  }
}

TEST(LzEntropyRate, Deterministic) {
  std::vector<Symbol> v(1000);
  std::mt19937_64 rng(8);
  for (auto& s : v) s = static_cast<Symbol>(rng() % 4);
  const SymbolSequence s(4, v);
  EXPECT_EQ(lz_entropy_rate(s).bits_per_symbol, lz_entropy_rate(s).bits_per_symbol);
}
