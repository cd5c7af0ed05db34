#pragma once

// Binary Context Tree Weighting.
//
// Each node of the context tree keeps Krichevsky-Trofimov counts for the bits
// seen in its context and two log2 probabilities: the KT block probability
// Pe and the weighted probability
//
//   Pw = Pe                               at depth D
//   Pw = 1/2 Pe + 1/2 Pw(child0) Pw(child1)   above depth D
//
// The root's Pw is the exact Bayesian mixture over all tree sources of depth
// <= D under the prior 2^(-|S| - N(S) + 1) with Dirichlet(1/2, 1/2) leaves.
// Multi-symbol sequences are expanded to fixed-width bits, MSB first.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "predictability/error.hpp"
#include "predictability/series_model.hpp"

namespace predictability {

inline constexpr int kDefaultCtwDepth = 20;
inline constexpr int kMaxCtwDepth = 48;

struct CtwParams {
  int depth = kDefaultCtwDepth;
  int bits_per_symbol = 1;
};

struct ContextTreeNode {
  std::uint32_t count_zero = 0;
  std::uint32_t count_one = 0;
  double log_pe = 0.0;
  double log_pw = 0.0;
  std::array<std::int32_t, 2> children{-1, -1};
};

struct CtwResult {
  double log2_mixture_probability = 0.0;
  std::size_t n_bits = 0;
  double entropy_bits_per_symbol = 0.0;
  std::size_t node_count = 0;
};

inline int bits_for_alphabet(int alphabet_size) {
  if (alphabet_size < 2 || !std::has_single_bit(static_cast<unsigned>(alphabet_size))) {
    throw Error(ErrorKind::validation,
                "CTW needs a power-of-two alphabet, got " + std::to_string(alphabet_size) +
                    "; re-discretize into 2, 4 or 8 states");
  }
  return std::countr_zero(static_cast<unsigned>(alphabet_size));
}

inline std::vector<std::uint8_t> symbols_to_bits(const SymbolSequence& seq) {
  const int width = bits_for_alphabet(seq.alphabet_size());
  std::vector<std::uint8_t> bits;
  bits.reserve(seq.size() * static_cast<std::size_t>(width));
  for (Symbol s : seq.symbols()) {
    for (int b = width - 1; b >= 0; --b) {
      bits.push_back(static_cast<std::uint8_t>((s >> b) & 1U));
    }
  }
  return bits;
}

/// log2 of the KT block probability Gamma(a+1/2) Gamma(b+1/2) / (pi Gamma(a+b+1)).
inline double kt_log_probability(std::uint64_t count_zero, std::uint64_t count_one) {
  const double a = static_cast<double>(count_zero);
  const double b = static_cast<double>(count_one);
  const double ln = std::lgamma(a + 0.5) + std::lgamma(b + 0.5) -
                    std::log(std::acos(-1.0)) - std::lgamma(a + b + 1.0);
  return ln / std::log(2.0);
}

namespace detail {

// log2(1/2 * 2^x + 1/2 * 2^y) without leaving the log domain.
inline double log2_half_sum(double x, double y) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  return hi + std::log2(1.0 + std::exp2(lo - hi)) - 1.0;
}

}  // namespace detail

/// Sequential CTW state. The D bits preceding the first update are zeros.
/// Not safe for concurrent mutation; give each estimation run its own tree.
class ContextTree {
 public:
  explicit ContextTree(int depth) : depth_(depth) {
    if (depth < 0 || depth > kMaxCtwDepth) {
      throw Error(ErrorKind::validation, "CTW depth must be in [0, 48]");
    }
    nodes_.emplace_back();
    path_.resize(static_cast<std::size_t>(depth) + 1);
  }

  void update(std::uint8_t bit) {
    const std::size_t d_max = static_cast<std::size_t>(depth_);
    path_[0] = 0;
    for (std::size_t d = 1; d <= d_max; ++d) {
      const std::uint8_t ctx = context_bit(d);
      const auto parent = static_cast<std::size_t>(path_[d - 1]);
      std::int32_t child = nodes_[parent].children[ctx];
      if (child < 0) {
        child = static_cast<std::int32_t>(nodes_.size());
        nodes_[parent].children[ctx] = child;
        nodes_.emplace_back();
      }
      path_[d] = child;
    }

    for (std::size_t k = 0; k <= d_max; ++k) {
      const std::size_t d = d_max - k;
      ContextTreeNode& node = nodes_[static_cast<std::size_t>(path_[d])];
      const double a = node.count_zero;
      const double b = node.count_one;
      node.log_pe += std::log2(((bit ? b : a) + 0.5) / (a + b + 1.0));
      (bit ? node.count_one : node.count_zero) += 1;
      if (d == d_max) {
        node.log_pw = node.log_pe;
      } else {
        double children = 0.0;
        for (std::int32_t c : node.children) {
          if (c >= 0) children += nodes_[static_cast<std::size_t>(c)].log_pw;
        }
        node.log_pw = detail::log2_half_sum(node.log_pe, children);
      }
    }
    history_.push_back(bit);
  }

  double log2_probability() const noexcept { return nodes_[0].log_pw; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t bits_seen() const noexcept { return history_.size(); }
  const ContextTreeNode& root() const noexcept { return nodes_[0]; }

 private:
  // d-th most recent bit before the one being coded, zero before the start.
  std::uint8_t context_bit(std::size_t d) const {
    return history_.size() >= d ? history_[history_.size() - d] : 0;
  }

  int depth_;
  std::vector<ContextTreeNode> nodes_;
  std::vector<std::int32_t> path_;
  std::vector<std::uint8_t> history_;
};

inline CtwResult ctw_log_mixture(std::span<const std::uint8_t> bits, const CtwParams& params) {
  if (bits.empty()) {
    throw Error(ErrorKind::empty_input, "CTW needs at least one bit");
  }
  if (params.bits_per_symbol < 1) {
    throw Error(ErrorKind::validation, "bits_per_symbol must be at least 1");
  }
  ContextTree tree(params.depth);
  for (std::uint8_t b : bits) {
    if (b > 1) throw Error(ErrorKind::validation, "bit sequence contains a non-binary value");
    tree.update(b);
  }
  CtwResult r;
  r.log2_mixture_probability = tree.log2_probability();
  r.n_bits = bits.size();
  r.entropy_bits_per_symbol = -r.log2_mixture_probability / static_cast<double>(r.n_bits) *
                              params.bits_per_symbol;
  r.node_count = tree.node_count();
  return r;
}

inline EntropyEstimate ctw_entropy_rate(const SymbolSequence& seq, int depth = kDefaultCtwDepth) {
  if (seq.size() < 2) {
    throw Error(ErrorKind::too_short, "CTW entropy rate needs at least 2 symbols");
  }
  const int width = bits_for_alphabet(seq.alphabet_size());
  const auto bits = symbols_to_bits(seq);
  const CtwResult r = ctw_log_mixture(bits, CtwParams{depth, width});

  EntropyEstimate est;
  est.bits_per_symbol = r.entropy_bits_per_symbol;
  est.estimator = Estimator::ctw;
  est.sample_size = seq.size();
  est.params.alphabet_size = seq.alphabet_size();
  est.params.ctw_depth = depth;
  return est;
}

}  // namespace predictability
