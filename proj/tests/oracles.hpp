#pragma once

// Slow, obviously-correct reference implementations used only by tests.
// None of these share code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>
#include <boost/graph/chrobak_payne_drawing.hpp>
#include <boost/graph/graph_traits.hpp>
#include <boost/graph/planar_canonical_ordering.hpp>
#include <boost/graph/properties.hpp>
#include <boost/property_map/property_map.hpp>

namespace oracle {

// ---------------------------------------------------------------------------
// Match lengths: Lambda_i = 1 + longest L such that x[i, i+L) appears wholly
// inside x[0, i).
inline std::vector<std::size_t> match_lengths(const std::vector<std::uint32_t>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t len = 1; i + len <= n && len <= i; ++len) {
      bool found = false;
      for (std::size_t j = 0; j + len <= i && !found; ++j) {
        found = std::equal(x.begin() + static_cast<std::ptrdiff_t>(j),
                           x.begin() + static_cast<std::ptrdiff_t>(j + len),
                           x.begin() + static_cast<std::ptrdiff_t>(i));
      }
      if (found) best = len;
    }
    out[i] = best + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// KT block probability as the sequential product of (count + 1/2)/(total + 1).
inline double kt_sequential_log2(const std::vector<int>& bits) {
  double p = 1.0;
  double a = 0.0, b = 0.0;
  for (int bit : bits) {
    p *= ((bit ? b : a) + 0.5) / (a + b + 1.0);
    (bit ? b : a) += 1.0;
  }
  return std::log2(p);
}

// Every full binary suffix set of depth <= max_depth. A context string lists
// the most recent past bit first.
inline void enumerate_suffix_sets(const std::string& prefix, int max_depth,
                                  std::vector<std::vector<std::string>>& out) {
  out.push_back({prefix});
  if (static_cast<int>(prefix.size()) == max_depth) return;
  std::vector<std::vector<std::string>> left, right;
  enumerate_suffix_sets(prefix + "0", max_depth, left);
  enumerate_suffix_sets(prefix + "1", max_depth, right);
  for (const auto& l : left) {
    for (const auto& r : right) {
      std::vector<std::string> s = l;
      s.insert(s.end(), r.begin(), r.end());
      out.push_back(std::move(s));
    }
  }
}

inline std::vector<std::vector<std::string>> suffix_sets(int max_depth) {
  std::vector<std::vector<std::string>> out;
  enumerate_suffix_sets("", max_depth, out);
  return out;
}

// 2^-(|S| + #{leaves shallower than D} - 1).
inline double suffix_set_prior(const std::vector<std::string>& s, int max_depth) {
  int shallow = 0;
  for (const auto& leaf : s) shallow += static_cast<int>(leaf.size()) < max_depth;
  return std::exp2(-(static_cast<double>(s.size()) + shallow - 1.0));
}

// Mixture probability sum_S pi(S) prod_{s in S} KT(bits whose context ends in s),
// with zeros assumed before the first bit.
inline double ctw_mixture_log2(const std::vector<int>& bits, int max_depth) {
  double total = 0.0;
  for (const auto& s : suffix_sets(max_depth)) {
    double p = suffix_set_prior(s, max_depth);
    for (const auto& leaf : s) {
      std::vector<int> sub;
      for (std::size_t t = 0; t < bits.size(); ++t) {
        bool match = true;
        for (std::size_t k = 0; k < leaf.size() && match; ++k) {
          const int past = t >= k + 1 ? bits[t - k - 1] : 0;
          match = past == leaf[k] - '0';
        }
        if (match) sub.push_back(bits[t]);
      }
      p *= std::exp2(kt_sequential_log2(sub));
    }
    total += p;
  }
  return std::log2(total);
}

// ---------------------------------------------------------------------------
// BDS ingredients straight from their definitions.
struct BdsParts {
  double c_full = 0.0;  // C over all pairs of single points
  double k = 0.0;       // fraction of ordered distinct triples with both links close
  double c1_tail = 0.0; // C over the last n - m + 1 points
  double cm = 0.0;      // C over m-histories
};

inline BdsParts bds_parts(const std::vector<double>& x, int m, double eps) {
  const std::size_t n = x.size();
  auto close = [&](std::size_t i, std::size_t j) { return std::abs(x[i] - x[j]) <= eps; };
  BdsParts out;
  double pairs = 0.0, hits = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      pairs += 1.0;
      hits += close(i, j);
    }
  }
  out.c_full = hits / pairs;
  double triples = 0.0, both = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        triples += 1.0;
        both += close(i, j) && close(j, k);
      }
    }
  }
  out.k = both / triples;

  auto hist_c = [&](std::size_t first, std::size_t dim) {
    double p = 0.0, h = 0.0;
    for (std::size_t s = first; s + dim <= n; ++s) {
      for (std::size_t t = s + 1; t + dim <= n; ++t) {
        bool ok = true;
        for (std::size_t d = 0; d < dim; ++d) ok = ok && close(s + d, t + d);
        p += 1.0;
        h += ok;
      }
    }
    return h / p;
  };
  out.c1_tail = hist_c(static_cast<std::size_t>(m - 1), 1);
  out.cm = hist_c(0, static_cast<std::size_t>(m));
  return out;
}

// ---------------------------------------------------------------------------
// Minimum spanning tree weight by enumerating every labelled tree through its
// Pruefer sequence. n^(n-2) trees; keep n <= 8.
inline double min_spanning_weight(std::size_t n, const std::function<double(std::size_t, std::size_t)>& w) {
  if (n == 1) return 0.0;
  if (n == 2) return w(0, 1);
  std::vector<std::size_t> code(n - 2, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<std::size_t> degree(n, 1);
    for (std::size_t c : code) ++degree[c];
    double total = 0.0;
    for (std::size_t c : code) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      total += w(leaf, c);
      --degree[leaf];
      --degree[c];
    }
    std::size_t u = n, v = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (degree[i] == 1) (u == n ? u : v) = i;
    }
    total += w(u, v);
    best = std::min(best, total);

    std::size_t pos = 0;
    while (pos < code.size() && ++code[pos] == n) code[pos++] = 0;
    if (pos == code.size()) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Planarity certificate: a straight-line drawing on an integer grid, checked
// by pairwise segment intersection. A maximal planar graph admits one; a
// graph that is not planar cannot produce a crossing-free drawing.
struct Point {
  long long x = 0;
  long long y = 0;
};

inline long long orient(Point a, Point b, Point c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

// True when segments ab and cd meet anywhere other than a shared endpoint.
inline bool segments_cross(Point a, Point b, Point c, Point d, bool share_endpoint) {
  const long long o1 = orient(a, b, c), o2 = orient(a, b, d);
  const long long o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (share_endpoint) {
    // Collinear and overlapping is the only way two edges at a common vertex clash.
    return o1 == 0 && o2 == 0 && (on_segment(a, b, c) + on_segment(a, b, d) + on_segment(c, d, a) +
                                  on_segment(c, d, b)) > 2;
  }
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
    return true;
  }
  return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d)) ||
         (o3 == 0 && on_segment(c, d, a)) || (o4 == 0 && on_segment(c, d, b));
}

inline bool drawing_is_plane(const std::vector<Point>& pos,
                             const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      if (pos[i].x == pos[j].x && pos[i].y == pos[j].y) return false;
    }
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    for (std::size_t f = e + 1; f < edges.size(); ++f) {
      const auto [a, b] = edges[e];
      const auto [c, d] = edges[f];
      const bool share = a == c || a == d || b == c || b == d;
      if (segments_cross(pos[a], pos[b], pos[c], pos[d], share)) return false;
    }
  }
  return true;
}

// Straight-line drawing of a maximal planar graph (3n - 6 edges, n >= 3).
// Returns an empty vector if no planar embedding exists.
inline std::vector<Point> straight_line_drawing(std::size_t n,
                                                const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS,
                                      boost::property<boost::vertex_index_t, int>,
                                      boost::property<boost::edge_index_t, int>>;
  using EdgeT = boost::graph_traits<Graph>::edge_descriptor;
  using Vertex = boost::graph_traits<Graph>::vertex_descriptor;
  Graph g(n);
  for (const auto& [u, v] : edges) boost::add_edge(u, v, g);
  int idx = 0;
  auto edge_index = boost::get(boost::edge_index, g);
  for (auto [it, end] = boost::edges(g); it != end; ++it) boost::put(edge_index, *it, idx++);

  using Embedding = std::vector<std::vector<EdgeT>>;
  Embedding embedding(n);
  if (!boost::boyer_myrvold_planarity_test(boost::boyer_myrvold_params::graph = g,
                                           boost::boyer_myrvold_params::embedding = &embedding[0])) {
    return {};
  }
  std::vector<Vertex> ordering;
  boost::planar_canonical_ordering(g, &embedding[0], std::back_inserter(ordering));

  struct Coord {
    std::size_t x;
    std::size_t y;
  };
  std::vector<Coord> coords(n);
  auto drawing = boost::make_iterator_property_map(coords.begin(), boost::get(boost::vertex_index, g));
  boost::chrobak_payne_straight_line_drawing(g, embedding, ordering.begin(), ordering.end(), drawing);
  std::vector<Point> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {static_cast<long long>(coords[i].x), static_cast<long long>(coords[i].y)};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spearman rank correlation via average ranks and the Pearson formula.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0.0, equal = 0.0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
