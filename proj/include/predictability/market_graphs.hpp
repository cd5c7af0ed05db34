#pragma once

// Correlation networks over instruments: Pearson correlation of log returns,
// the distance d = sqrt(2 (1 - rho)), and two filtered graphs: the minimum
// spanning tree and the planar maximally filtered graph (PMFG).
//
// Both filters consume edges in the same total order, ascending distance and
// then lexicographic (ticker_i, ticker_j), so the MST is always a subgraph of
// the PMFG and outputs are reproducible under ties.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>

#include "predictability/error.hpp"
#include "predictability/series_model.hpp"

namespace predictability {

struct CorrelationMatrix {
  std::vector<std::string> tickers;
  std::vector<double> rho;  // row-major, size n * n

  std::size_t size() const noexcept { return tickers.size(); }
  double at(std::size_t i, std::size_t j) const { return rho[i * tickers.size() + j]; }
};

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double distance = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct WeightedGraph {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
};

enum class FilterKind { mst, pmfg };

inline std::string_view to_string(FilterKind k) { return k == FilterKind::mst ? "mst" : "pmfg"; }

struct NodeAttributes {
  std::string sector;
  std::optional<double> entropy;
};

struct FilteredGraph {
  FilterKind kind = FilterKind::mst;
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  std::vector<NodeAttributes> attributes;
};

/// Throws naming the first series whose timestamps differ from the first one.
inline void check_aligned(std::span<const PriceSeries> series) {
  if (series.empty()) return;
  const auto& ref = series.front().points;
  for (const auto& s : series) {
    bool same = s.points.size() == ref.size();
    for (std::size_t i = 0; same && i < ref.size(); ++i) {
      same = s.points[i].timestamp == ref[i].timestamp;
    }
    if (!same) {
      throw Error(ErrorKind::validation, "series '" + s.ticker + "' is not aligned with '" +
                                             series.front().ticker + "'");
    }
  }
}

inline CorrelationMatrix correlation_matrix(std::span<const ReturnSeries> series) {
  const std::size_t n = series.size();
  if (n == 0) throw Error(ErrorKind::empty_input, "no series for correlation matrix");
  const std::size_t len = series.front().values.size();
  if (len < 3) throw Error(ErrorKind::too_short, "correlation needs at least 3 observations");

  CorrelationMatrix out;
  std::vector<std::vector<double>> centered(n);
  std::vector<double> norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = series[i].values;
    if (v.size() != len) {
      throw Error(ErrorKind::length_mismatch,
                  "series '" + series[i].ticker + "' has a different length");
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(len);
    centered[i].resize(len);
    double ss = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      centered[i][t] = v[t] - mean;
      ss += centered[i][t] * centered[i][t];
    }
    if (!(ss > 0.0)) {
      throw Error(ErrorKind::degenerate, "series '" + series[i].ticker + "' has zero variance");
    }
    norm[i] = std::sqrt(ss);
    out.tickers.push_back(series[i].ticker);
  }

  out.rho.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.rho[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < len; ++t) dot += centered[i][t] * centered[j][t];
      const double r = std::clamp(dot / (norm[i] * norm[j]), -1.0, 1.0);
      out.rho[i * n + j] = r;
      out.rho[j * n + i] = r;
    }
  }
  return out;
}

inline double correlation_distance(double rho) {
  return std::sqrt(std::max(0.0, 2.0 * (1.0 - std::clamp(rho, -1.0, 1.0))));
}

/// Complete graph with d_ij = sqrt(2 (1 - rho_ij)).
inline WeightedGraph distance_graph(const CorrelationMatrix& corr) {
  WeightedGraph g;
  g.nodes = corr.tickers;
  const std::size_t n = corr.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      g.edges.push_back({i, j, correlation_distance(corr.at(i, j))});
    }
  }
  return g;
}

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

inline std::vector<Edge> ordered_edges(const WeightedGraph& g) {
  std::vector<Edge> edges;
  edges.reserve(g.edges.size());
  for (const Edge& e : g.edges) {
    if (e.u == e.v) throw Error(ErrorKind::validation, "graph contains a self-loop");
    if (e.u >= g.nodes.size() || e.v >= g.nodes.size()) {
      throw Error(ErrorKind::validation, "edge references an unknown node");
    }
    if (!(e.distance >= 0.0)) throw Error(ErrorKind::validation, "edge distance is negative");
    Edge norm = e;
    // Endpoint order by ticker so ties compare (ticker_i, ticker_j) with i <= j.
    if (g.nodes[norm.v] < g.nodes[norm.u] || (g.nodes[norm.v] == g.nodes[norm.u] && norm.v < norm.u)) {
      std::swap(norm.u, norm.v);
    }
    edges.push_back(norm);
  }
  std::stable_sort(edges.begin(), edges.end(), [&](const Edge& x, const Edge& y) {
    if (x.distance != y.distance) return x.distance < y.distance;
    if (g.nodes[x.u] != g.nodes[y.u]) return g.nodes[x.u] < g.nodes[y.u];
    return g.nodes[x.v] < g.nodes[y.v];
  });
  return edges;
}

}  // namespace detail

inline bool is_planar(std::size_t num_nodes, std::span<const Edge> edges) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;
  Graph g(num_nodes);
  for (const Edge& e : edges) boost::add_edge(e.u, e.v, g);
  return boost::boyer_myrvold_planarity_test(g);
}

inline FilteredGraph mst(const WeightedGraph& graph) {
  const std::size_t n = graph.nodes.size();
  if (n == 0) throw Error(ErrorKind::empty_input, "graph has no nodes");
  FilteredGraph out;
  out.kind = FilterKind::mst;
  out.nodes = graph.nodes;
  out.attributes.resize(n);
  detail::DisjointSets sets(n);
  for (const Edge& e : detail::ordered_edges(graph)) {
    if (sets.unite(e.u, e.v)) {
      out.edges.push_back(e);
      if (out.edges.size() + 1 == n) break;
    }
  }
  if (out.edges.size() + 1 != n) {
    throw Error(ErrorKind::validation, "graph is disconnected; no spanning tree exists");
  }
  return out;
}

/// Greedy insertion in ascending distance, keeping an edge only if the graph
/// stays planar, until 3(n - 2) edges are retained.
inline FilteredGraph pmfg(const WeightedGraph& graph) {
  const std::size_t n = graph.nodes.size();
  if (n < 3) throw Error(ErrorKind::too_short, "PMFG needs at least 3 nodes");
  const std::size_t target = 3 * (n - 2);

  FilteredGraph out;
  out.kind = FilterKind::pmfg;
  out.nodes = graph.nodes;
  out.attributes.resize(n);
  detail::DisjointSets sets(n);
  for (const Edge& e : detail::ordered_edges(graph)) {
    // An edge joining two components can never break planarity.
    const bool bridges = sets.find(e.u) != sets.find(e.v);
    out.edges.push_back(e);
    if (!bridges && !is_planar(n, out.edges)) {
      out.edges.pop_back();
      continue;
    }
    sets.unite(e.u, e.v);
    if (out.edges.size() == target) break;
  }
  if (out.edges.size() != target) {
    throw Error(ErrorKind::validation, "PMFG needs a complete distance graph");
  }
  return out;
}

}  // namespace predictability
