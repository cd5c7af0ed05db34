#pragma once

// Price, return and symbol data model.
//
// Prices are turned into natural-log returns, returns are discretized into
// equally populated quantile buckets, and plug-in Shannon entropies are
// computed over the resulting symbols. Entropies are always in bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "predictability/error.hpp"

namespace predictability {

enum class Sampling { daily, intraday };

inline std::string_view to_string(Sampling s) {
  return s == Sampling::daily ? "daily" : "intraday";
}

struct PricePoint {
  std::int64_t timestamp = 0;  // epoch seconds, UTC
  double price = 0.0;
};

struct PriceSeries {
  std::string ticker;
  Sampling sampling = Sampling::daily;
  std::vector<PricePoint> points;
};

struct ReturnSeries {
  std::string ticker;
  std::vector<double> values;
};

using Symbol = std::uint32_t;

/// Finite-alphabet series. Construction validates that the sequence is
/// nonempty and every symbol lies in [0, alphabet_size).
class SymbolSequence {
 public:
  SymbolSequence(int alphabet_size, std::vector<Symbol> symbols)
      : alphabet_size_(alphabet_size), symbols_(std::move(symbols)) {
    if (alphabet_size_ < 2) {
      throw Error(ErrorKind::validation, "alphabet size must be at least 2");
    }
    if (symbols_.empty()) {
      throw Error(ErrorKind::empty_input, "symbol sequence is empty");
    }
    for (Symbol s : symbols_) {
      if (s >= static_cast<Symbol>(alphabet_size_)) {
        throw Error(ErrorKind::validation,
                    "symbol " + std::to_string(s) + " outside alphabet of size " +
                        std::to_string(alphabet_size_));
      }
    }
  }

  int alphabet_size() const noexcept { return alphabet_size_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  std::span<const Symbol> symbols() const noexcept { return symbols_; }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }

  friend bool operator==(const SymbolSequence&, const SymbolSequence&) = default;

 private:
  int alphabet_size_;
  std::vector<Symbol> symbols_;
};

/// Probabilities keyed by outcome label. Validated on construction.
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(std::map<std::string, double> probabilities)
      : probabilities_(std::move(probabilities)) {
    if (probabilities_.empty()) {
      throw Error(ErrorKind::empty_input, "distribution has no outcomes");
    }
    double total = 0.0;
    for (const auto& [outcome, p] : probabilities_) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorKind::validation,
                    "probability of '" + outcome + "' outside [0, 1]");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error(ErrorKind::validation, "probabilities do not sum to 1");
    }
  }

  const std::map<std::string, double>& probabilities() const noexcept {
    return probabilities_;
  }

  double at(const std::string& outcome) const {
    auto it = probabilities_.find(outcome);
    return it == probabilities_.end() ? 0.0 : it->second;
  }

 private:
  std::map<std::string, double> probabilities_;
};

enum class Estimator { lz, ctw, plugin };

inline std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::lz: return "lz";
    case Estimator::ctw: return "ctw";
    case Estimator::plugin: return "plugin";
  }
  return "unknown";
}

struct EstimatorParams {
  int alphabet_size = 0;
  std::optional<int> ctw_depth;
  std::optional<int> word_length;
};

/// Per-symbol entropy-rate estimate. Estimators can overshoot log2(A) on short
/// inputs, so the upper bound is not enforced here.
struct EntropyEstimate {
  double bits_per_symbol = 0.0;
  Estimator estimator = Estimator::lz;
  std::size_t sample_size = 0;
  EstimatorParams params;
};

inline ReturnSeries log_returns(const PriceSeries& series) {
  const auto& pts = series.points;
  if (pts.size() < 2) {
    throw Error(ErrorKind::empty_input,
                "series '" + series.ticker + "' needs at least 2 prices");
  }
  for (const auto& p : pts) {
    if (!(p.price > 0.0) || !std::isfinite(p.price)) {
      throw Error(ErrorKind::domain,
                  "series '" + series.ticker + "' has a nonpositive price");
    }
  }
  ReturnSeries out{series.ticker, {}};
  out.values.reserve(pts.size() - 1);
  for (std::size_t t = 1; t < pts.size(); ++t) {
    out.values.push_back(std::log(pts[t].price / pts[t - 1].price));
  }
  return out;
}

/// Ranks by (value, original index) and cuts the ranks into contiguous blocks;
/// the first n % num_states blocks receive one extra element.
inline SymbolSequence quantile_discretize(const ReturnSeries& returns, int num_states) {
  if (num_states < 2) {
    throw Error(ErrorKind::validation, "num_states must be at least 2");
  }
  const auto& v = returns.values;
  const std::size_t n = v.size();
  if (n < static_cast<std::size_t>(num_states)) {
    throw Error(ErrorKind::too_short, "fewer observations than states in '" +
                                          returns.ticker + "'");
  }
  for (double x : v) {
    if (std::isnan(x)) {
      throw Error(ErrorKind::domain, "NaN return in '" + returns.ticker + "'");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

  const std::size_t k = static_cast<std::size_t>(num_states);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::vector<Symbol> symbols(n);
  std::size_t rank = 0;
  for (std::size_t bucket = 0; bucket < k; ++bucket) {
    const std::size_t len = base + (bucket < extra ? 1 : 0);
    for (std::size_t j = 0; j < len; ++j) {
      symbols[order[rank++]] = static_cast<Symbol>(bucket);
    }
  }
  return SymbolSequence(num_states, std::move(symbols));
}

namespace detail {

inline double entropy_from_counts(const std::map<std::string, std::size_t>& counts,
                                  std::size_t total) {
  double h = 0.0;
  const double n = static_cast<double>(total);
  for (const auto& [key, c] : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

inline std::string word_key(std::span<const Symbol> word, int alphabet_size) {
  std::string key;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (alphabet_size > 10 && i > 0) key += '.';
    key += std::to_string(word[i]);
  }
  return key;
}

}  // namespace detail

inline double shannon_entropy(const DiscreteDistribution& dist) {
  double h = 0.0;
  for (const auto& [outcome, p] : dist.probabilities()) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

/// Relative frequencies of overlapping words. Words are keyed by their digits
/// ("01"); alphabets above 10 symbols use '.' separators.
inline DiscreteDistribution empirical_distribution(const SymbolSequence& seq,
                                                   std::size_t word_len) {
  if (word_len < 1) {
    throw Error(ErrorKind::validation, "word length must be at least 1");
  }
  if (word_len > seq.size()) {
    throw Error(ErrorKind::too_short, "word length exceeds sequence length");
  }
  std::map<std::string, std::size_t> counts;
  const std::size_t num_words = seq.size() - word_len + 1;
  for (std::size_t i = 0; i < num_words; ++i) {
    ++counts[detail::word_key(seq.symbols().subspan(i, word_len), seq.alphabet_size())];
  }
  std::map<std::string, double> probs;
  for (const auto& [key, c] : counts) {
    probs[key] = static_cast<double>(c) / static_cast<double>(num_words);
  }
  return DiscreteDistribution(std::move(probs));
}

inline double joint_entropy(const SymbolSequence& x, const SymbolSequence& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::length_mismatch, "joint entropy needs equal lengths");
  }
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ++counts[std::to_string(x[i]) + "," + std::to_string(y[i])];
  }
  return detail::entropy_from_counts(counts, x.size());
}

/// H(X|Y) = H(X,Y) - H(Y), evaluated literally so the identity holds exactly.
inline double conditional_entropy(const SymbolSequence& x, const SymbolSequence& y) {
  return joint_entropy(x, y) - shannon_entropy(empirical_distribution(y, 1));
}

}  // namespace predictability
