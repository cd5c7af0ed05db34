#pragma once

// Synthetic sources with known entropy rates and the estimator convergence
// harness.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "predictability/ctw_entropy.hpp"
#include "predictability/error.hpp"
#include "predictability/lz_entropy.hpp"
#include "predictability/series_model.hpp"

namespace predictability {

enum class SourceKind { constant, uniform_iid, markov };

/// Row-stochastic matrix, row-major.
struct TransitionMatrix {
  std::size_t states = 0;
  std::vector<double> p;

  double at(std::size_t i, std::size_t j) const { return p[i * states + j]; }
};

struct SyntheticSource {
  SourceKind kind = SourceKind::uniform_iid;
  int alphabet_size = 4;
  std::optional<TransitionMatrix> transition;
  std::uint64_t seed = 0;
};

struct ConvergenceCurve {
  std::vector<std::size_t> sizes;
  std::vector<double> estimates_lz;
  std::vector<double> estimates_ctw;
  int trials = 0;
  double true_entropy = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent, reproducible stream for (seed, stream).
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

inline void validate_transition(const TransitionMatrix& t) {
  if (t.states < 1 || t.p.size() != t.states * t.states) {
    throw Error(ErrorKind::validation, "transition matrix has the wrong shape");
  }
  for (std::size_t i = 0; i < t.states; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < t.states; ++j) {
      const double v = t.at(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorKind::validation, "transition probability outside [0, 1]");
      }
      row += v;
    }
    if (std::abs(row - 1.0) > 1e-12) {
      throw Error(ErrorKind::validation, "transition row " + std::to_string(i) + " does not sum to 1");
    }
  }
}

inline bool is_irreducible(const TransitionMatrix& t) {
  // Every state reachable from 0 in the graph and in its transpose.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<bool> seen(t.states, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < t.states; ++j) {
        const double w = pass == 0 ? t.at(i, j) : t.at(j, i);
        if (w > 0.0 && !seen[j]) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
    for (bool s : seen) {
      if (!s) return false;
    }
  }
  return true;
}

/// Solves mu P = mu, sum mu = 1 by Gaussian elimination with partial pivoting.
inline std::vector<double> stationary_distribution(const TransitionMatrix& t) {
  validate_transition(t);
  if (!is_irreducible(t)) throw Error(ErrorKind::validation, "Markov chain is reducible");
  const std::size_t n = t.states;
  // Rows: (P^T - I) with the last equation replaced by normalization.
  std::vector<double> a(n * (n + 1), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a[i * (n + 1) + j] = t.at(j, i) - (i == j ? 1.0 : 0.0);
    }
  }
  for (std::size_t j = 0; j < n; ++j) a[(n - 1) * (n + 1) + j] = 1.0;
  a[(n - 1) * (n + 1) + n] = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * (n + 1) + col]) > std::abs(a[pivot * (n + 1) + col])) pivot = r;
    }
    for (std::size_t c = 0; c <= n; ++c) std::swap(a[col * (n + 1) + c], a[pivot * (n + 1) + c]);
    const double diag = a[col * (n + 1) + col];
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * (n + 1) + col] / diag;
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= n; ++c) a[r * (n + 1) + c] -= f * a[col * (n + 1) + c];
    }
  }
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = a[i * (n + 1) + n] / a[i * (n + 1) + i];
  return mu;
}

/// H = -sum_i mu_i sum_j P_ij log2 P_ij.
inline double markov_entropy_rate(const TransitionMatrix& t) {
  const auto mu = stationary_distribution(t);
  double h = 0.0;
  for (std::size_t i = 0; i < t.states; ++i) {
    for (std::size_t j = 0; j < t.states; ++j) {
      const double p = t.at(i, j);
      if (p > 0.0) h -= mu[i] * p * std::log2(p);
    }
  }
  return h;
}

/// (1 - mixing) * cyclic shift + mixing * uniform. Doubly stochastic, so the
/// stationary law is uniform; the entropy rate rises monotonically from 0
/// (mixing = 0) to log2(A) (mixing = 1).
inline TransitionMatrix mixed_cycle_chain(int alphabet_size, double mixing) {
  if (alphabet_size < 2) throw Error(ErrorKind::validation, "alphabet size must be >= 2");
  if (!(mixing >= 0.0 && mixing <= 1.0)) throw Error(ErrorKind::validation, "mixing outside [0, 1]");
  const auto n = static_cast<std::size_t>(alphabet_size);
  TransitionMatrix t{n, std::vector<double>(n * n, mixing / static_cast<double>(n))};
  for (std::size_t i = 0; i < n; ++i) t.p[i * n + (i + 1) % n] += 1.0 - mixing;
  return t;
}

/// Mixed cycle chain whose analytic entropy rate equals target_bits.
inline TransitionMatrix chain_with_entropy(int alphabet_size, double target_bits) {
  const double max_bits = std::log2(static_cast<double>(alphabet_size));
  if (!(target_bits >= 0.0 && target_bits <= max_bits)) {
    throw Error(ErrorKind::validation, "target entropy outside [0, log2 A]");
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (markov_entropy_rate(mixed_cycle_chain(alphabet_size, mid)) < target_bits ? lo : hi) = mid;
  }
  return mixed_cycle_chain(alphabet_size, 0.5 * (lo + hi));
}

inline SymbolSequence generate(const SyntheticSource& source, std::size_t n) {
  if (n < 1) throw Error(ErrorKind::validation, "sequence length must be >= 1");
  if (source.alphabet_size < 2) throw Error(ErrorKind::validation, "alphabet size must be >= 2");
  std::vector<Symbol> out(n, 0);
  auto rng = make_rng(source.seed);
  switch (source.kind) {
    case SourceKind::constant:
      break;
    case SourceKind::uniform_iid: {
      std::uniform_int_distribution<Symbol> pick(0, static_cast<Symbol>(source.alphabet_size - 1));
      for (auto& s : out) s = pick(rng);
      break;
    }
    case SourceKind::markov: {
      if (!source.transition) throw Error(ErrorKind::validation, "markov source needs a transition matrix");
      const auto& t = *source.transition;
      if (t.states != static_cast<std::size_t>(source.alphabet_size)) {
        throw Error(ErrorKind::validation, "transition size does not match alphabet");
      }
      const auto mu = stationary_distribution(t);
      std::vector<std::discrete_distribution<Symbol>> rows;
      for (std::size_t i = 0; i < t.states; ++i) {
        rows.emplace_back(t.p.begin() + static_cast<std::ptrdiff_t>(i * t.states),
                          t.p.begin() + static_cast<std::ptrdiff_t>((i + 1) * t.states));
      }
      std::discrete_distribution<Symbol> start(mu.begin(), mu.end());
      out[0] = start(rng);
      for (std::size_t k = 1; k < n; ++k) out[k] = rows[out[k - 1]](rng);
      break;
    }
  }
  return SymbolSequence(source.alphabet_size, std::move(out));
}

inline double true_entropy_rate(const SyntheticSource& source) {
  switch (source.kind) {
    case SourceKind::constant: return 0.0;
    case SourceKind::uniform_iid: return std::log2(static_cast<double>(source.alphabet_size));
    case SourceKind::markov:
      if (!source.transition) throw Error(ErrorKind::validation, "markov source needs a transition matrix");
      return markov_entropy_rate(*source.transition);
  }
  return 0.0;
}

/// Trial k at every size uses seed splitmix(source.seed, k).
inline ConvergenceCurve convergence_curve(const SyntheticSource& source,
                                          std::span<const std::size_t> sizes, int trials,
                                          int ctw_depth = kDefaultCtwDepth) {
  if (trials < 1) throw Error(ErrorKind::validation, "need at least one trial");
  ConvergenceCurve curve;
  curve.trials = trials;
  curve.true_entropy = true_entropy_rate(source);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 10) throw Error(ErrorKind::validation, "convergence sizes must be >= 10");
    if (i > 0 && sizes[i] <= sizes[i - 1]) {
      throw Error(ErrorKind::validation, "convergence sizes must be strictly increasing");
    }
  }
  for (std::size_t size : sizes) {
    double lz = 0.0, ctw = 0.0;
    for (int k = 0; k < trials; ++k) {
      SyntheticSource trial = source;
      trial.seed = splitmix64(source.seed + static_cast<std::uint64_t>(k));
      const auto seq = generate(trial, size);
      lz += lz_entropy_rate(seq).bits_per_symbol;
      ctw += ctw_entropy_rate(seq, ctw_depth).bits_per_symbol;
    }
    curve.sizes.push_back(size);
    curve.estimates_lz.push_back(lz / trials);
    curve.estimates_ctw.push_back(ctw / trials);
  }
  return curve;
}

}  // namespace predictability
