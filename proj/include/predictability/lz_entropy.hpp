#pragma once

// Lempel-Ziv phrase complexity and the match-length entropy-rate estimator
//
//   H_lz = n log2(n) / sum_i Lambda_i
//
// where Lambda_i is the length of the shortest substring starting at i that
// does not occur anywhere inside x[0, i).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "predictability/error.hpp"
#include "predictability/series_model.hpp"

namespace predictability {

struct LzPhrase {
  std::size_t start = 0;
  std::size_t length = 0;
};

struct LzParse {
  std::vector<LzPhrase> phrases;
  std::size_t complexity = 0;
};

struct MatchLengths {
  std::vector<std::size_t> lambdas;
  std::size_t n = 0;
};

/// Left-to-right parse where each phrase is the shortest extension of an
/// earlier phrase not yet in the dictionary:
///   101001010010111110 -> 1|0|10|01|010|0101|11|110
/// A trailing phrase that is already in the dictionary still counts once.
inline LzParse lz76_complexity(const SymbolSequence& seq) {
  const auto x = seq.symbols();
  const std::size_t alphabet = static_cast<std::size_t>(seq.alphabet_size());
  // Phrase trie, children stored flat: node * alphabet + symbol.
  std::vector<std::int32_t> child(alphabet, -1);
  std::int32_t nodes = 1;

  LzParse parse;
  std::size_t pos = 0;
  while (pos < x.size()) {
    std::int32_t node = 0;
    std::size_t len = 0;
    while (pos + len < x.size()) {
      const std::size_t slot = static_cast<std::size_t>(node) * alphabet + x[pos + len];
      ++len;
      if (child[slot] < 0) {
        child[slot] = nodes++;
        child.resize(static_cast<std::size_t>(nodes) * alphabet, -1);
        break;
      }
      node = child[slot];
    }
    parse.phrases.push_back({pos, len});
    pos += len;
  }
  parse.complexity = parse.phrases.size();
  return parse;
}

namespace detail {

/// Online suffix automaton over an integer alphabet. After extend() has been
/// called for x[0..i), every substring of that prefix is readable from state 0.
class SuffixAutomaton {
 public:
  SuffixAutomaton(std::size_t alphabet, std::size_t expected_length)
      : alphabet_(alphabet) {
    len_.reserve(2 * expected_length + 2);
    link_.reserve(2 * expected_length + 2);
    next_.reserve((2 * expected_length + 2) * alphabet);
    add_state(0, -1);
  }

  void extend(Symbol c) {
    const std::int32_t cur = add_state(len_[last_] + 1, -1);
    std::int32_t p = last_;
    while (p != -1 && next(p, c) == -1) {
      set_next(p, c, cur);
      p = link_[p];
    }
    if (p == -1) {
      link_[cur] = 0;
    } else {
      const std::int32_t q = next(p, c);
      if (len_[p] + 1 == len_[q]) {
        link_[cur] = q;
      } else {
        const std::int32_t clone = add_state(len_[p] + 1, link_[q]);
        std::copy_n(next_.begin() + static_cast<std::ptrdiff_t>(q * alphabet_),
                    alphabet_,
                    next_.begin() + static_cast<std::ptrdiff_t>(clone * alphabet_));
        while (p != -1 && next(p, c) == q) {
          set_next(p, c, clone);
          p = link_[p];
        }
        link_[q] = clone;
        link_[cur] = clone;
      }
    }
    last_ = cur;
  }

  std::int32_t next(std::int32_t state, Symbol c) const {
    return next_[static_cast<std::size_t>(state) * alphabet_ + c];
  }

 private:
  std::int32_t add_state(std::int32_t len, std::int32_t link) {
    len_.push_back(len);
    link_.push_back(link);
    next_.resize(next_.size() + alphabet_, -1);
    return static_cast<std::int32_t>(len_.size() - 1);
  }

  void set_next(std::int32_t state, Symbol c, std::int32_t target) {
    next_[static_cast<std::size_t>(state) * alphabet_ + c] = target;
  }

  std::size_t alphabet_;
  std::vector<std::int32_t> len_;
  std::vector<std::int32_t> link_;
  std::vector<std::int32_t> next_;
  std::int32_t last_ = 0;
};

}  // namespace detail

/// Lambda_i = (longest prefix of x[i..] occurring inside x[0, i)) + 1.
/// When the whole tail x[i..] already occurs, this is the cap (n - i) + 1,
/// i.e. one past the longest available match. Runs in O(n + sum Lambda).
inline MatchLengths match_lengths(const SymbolSequence& seq) {
  const auto x = seq.symbols();
  const std::size_t n = x.size();
  detail::SuffixAutomaton automaton(static_cast<std::size_t>(seq.alphabet_size()), n);

  MatchLengths out;
  out.n = n;
  out.lambdas.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) automaton.extend(x[i - 1]);
    std::int32_t state = 0;
    std::size_t matched = 0;
    while (i + matched < n) {
      const std::int32_t nxt = automaton.next(state, x[i + matched]);
      if (nxt < 0) break;
      state = nxt;
      ++matched;
    }
    out.lambdas[i] = matched + 1;
  }
  return out;
}

inline EntropyEstimate lz_entropy_rate(const SymbolSequence& seq) {
  if (seq.size() < 2) {
    throw Error(ErrorKind::too_short, "LZ entropy rate needs at least 2 symbols");
  }
  const MatchLengths m = match_lengths(seq);
  const double total = std::accumulate(m.lambdas.begin(), m.lambdas.end(), 0.0);
  const double n = static_cast<double>(m.n);

  EntropyEstimate est;
  est.bits_per_symbol = n * std::log2(n) / total;
  est.estimator = Estimator::lz;
  est.sample_size = m.n;
  est.params.alphabet_size = seq.alphabet_size();
  return est;
}

}  // namespace predictability
