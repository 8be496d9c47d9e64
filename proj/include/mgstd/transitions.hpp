#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mgstd/dataset.hpp"
#include "mgstd/errors.hpp"
#include "mgstd/grid.hpp"

namespace mgstd {

using NodeId = std::int64_t;

/// Occupancy and directed pair counts of a dataset on one grid.
/// nu_i counts every point of D in cell i; mu_{i->j} counts consecutive
/// pairs (self pairs included). Counts are exact integers; probabilities
/// are computed on demand.
struct TransitionCounts {
  GridSpec grid;
  std::map<NodeId, std::int64_t> nu;
  std::map<std::pair<NodeId, NodeId>, std::int64_t> mu;

  std::int64_t nu_of(NodeId i) const {
    const auto it = nu.find(i);
    return it == nu.end() ? 0 : it->second;
  }
  std::int64_t mu_of(NodeId i, NodeId j) const {
    const auto it = mu.find({i, j});
    return it == mu.end() ? 0 : it->second;
  }
  std::int64_t total_pairs() const {
    std::int64_t t = 0;
    for (const auto& [ij, c] : mu) t += c;
    return t;
  }
};

inline TransitionCounts count_transitions(const Dataset& d,
                                          const GridSpec& grid) {
  if (d.dim() != grid.dim())
    throw std::invalid_argument("count_transitions: dimension mismatch");
  TransitionCounts tc{grid, {}, {}};
  const int m = d.dim();
  for (std::size_t k = 0; k < d.n_series(); ++k) {
    const std::size_t n = d.series_length(k);
    NodeId prev = -1;
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = d.point(k, i);
      NodeId cell;
      try {
        cell = grid.locate_linear(p);
      } catch (const out_of_domain_error& e) {
        std::string coords = "(";
        for (int l = 0; l < m; ++l)
          coords += (l ? "," : "") + std::to_string(p[l]);
        coords += ")";
        throw out_of_domain_error(std::string(e.what()) + "; point " + coords +
                                  " in series '" + d.series(k).id + "'");
      }
      ++tc.nu[cell];
      if (i > 0) ++tc.mu[{prev, cell}];
      prev = cell;
    }
  }
  return tc;
}

/// T_{i->j} = mu_{i->j} / nu_i (conditional transition frequency).
inline double transition_probability(const TransitionCounts& tc, NodeId i,
                                     NodeId j) {
  const std::int64_t nu_i = tc.nu_of(i);
  if (nu_i == 0)
    throw numeric_error("transition_probability: cell " + std::to_string(i) +
                        " is unoccupied, probability undefined");
  return static_cast<double>(tc.mu_of(i, j)) / static_cast<double>(nu_i);
}

enum class PairClass { forward, backward, comparable, none };

/// Superiority of direction i->j over j->i at level rho: forward when
/// T_{i->j}/T_{j->i} > rho, backward when < 1/rho, comparable between.
/// A zero opposing count gives ratio +infinity; both zero gives none.
inline PairClass classify_pair(const TransitionCounts& tc, NodeId i, NodeId j,
                               double rho) {
  if (i == j) throw std::invalid_argument("classify_pair: i == j");
  if (!(rho >= 1.0))
    throw std::invalid_argument("classify_pair: rho must be >= 1");
  const std::int64_t mu_ij = tc.mu_of(i, j);
  const std::int64_t mu_ji = tc.mu_of(j, i);
  if (mu_ij == 0 && mu_ji == 0) return PairClass::none;
  const double t_ij =
      mu_ij == 0 ? 0.0
                 : static_cast<double>(mu_ij) / static_cast<double>(tc.nu_of(i));
  const double t_ji =
      mu_ji == 0 ? 0.0
                 : static_cast<double>(mu_ji) / static_cast<double>(tc.nu_of(j));
  const double ratio =
      t_ji == 0.0 ? std::numeric_limits<double>::infinity() : t_ij / t_ji;
  if (ratio > rho) return PairClass::forward;
  if (ratio < 1.0 / rho) return PairClass::backward;
  return PairClass::comparable;
}

/// Directed graph on occupied cells; node ids are linearized cell indices.
/// Nodes and edges are kept sorted and unique.
struct Digraph {
  std::vector<NodeId> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;

  static Digraph make(std::vector<NodeId> nodes,
                      std::vector<std::pair<NodeId, NodeId>> edges) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (const auto& [u, v] : edges)
      if (!std::binary_search(nodes.begin(), nodes.end(), u) ||
          !std::binary_search(nodes.begin(), nodes.end(), v))
        throw std::invalid_argument("digraph: edge endpoint is not a node");
    return Digraph{std::move(nodes), std::move(edges)};
  }

  std::size_t n() const { return nodes.size(); }
  std::size_t index_of(NodeId id) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), id);
    if (it == nodes.end() || *it != id)
      throw std::invalid_argument("digraph: unknown node " + std::to_string(id));
    return static_cast<std::size_t>(it - nodes.begin());
  }
  bool has_edge(NodeId u, NodeId v) const {
    return std::binary_search(edges.begin(), edges.end(), std::pair{u, v});
  }

  /// Adjacency in compressed form over node positions: head[i]..head[i+1]
  /// indexes into targets.
  void adjacency(std::vector<std::size_t>& head,
                 std::vector<std::size_t>& targets) const {
    head.assign(n() + 1, 0);
    targets.clear();
    targets.reserve(edges.size());
    std::size_t e = 0;
    for (std::size_t i = 0; i < n(); ++i) {
      head[i] = targets.size();
      while (e < edges.size() && edges[e].first == nodes[i]) {
        targets.push_back(index_of(edges[e].second));
        ++e;
      }
    }
    head[n()] = targets.size();
  }
};

/// The filtered multi-valued map as a digraph. Edge i->j (i != j) needs an
/// observed transition, superiority not pointing the other way, and count
/// at least mu_star; the threshold applies to self loops as well.
inline Digraph build_multivalued_map(const TransitionCounts& tc, double rho,
                                     std::int64_t mu_star) {
  if (!(rho >= 1.0))
    throw std::invalid_argument("multivalued map: rho must be >= 1");
  if (mu_star < 1)
    throw std::invalid_argument("multivalued map: mu_star must be >= 1");
  std::vector<NodeId> nodes;
  nodes.reserve(tc.nu.size());
  for (const auto& [i, count] : tc.nu)
    if (count > 0) nodes.push_back(i);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& [ij, count] : tc.mu) {
    const auto [i, j] = ij;
    if (count < mu_star) continue;
    if (i == j) {
      edges.push_back(ij);
      continue;
    }
    const PairClass c = classify_pair(tc, i, j, rho);
    if (c == PairClass::forward || c == PairClass::comparable)
      edges.push_back(ij);
  }
  return Digraph::make(std::move(nodes), std::move(edges));
}

/// Unfiltered map from deterministic data: edge wherever at least one pair
/// was observed.
inline Digraph build_deterministic_map(const Dataset& d, const GridSpec& grid) {
  const TransitionCounts tc = count_transitions(d, grid);
  std::vector<NodeId> nodes;
  nodes.reserve(tc.nu.size());
  for (const auto& [i, count] : tc.nu) nodes.push_back(i);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(tc.mu.size());
  for (const auto& [ij, count] : tc.mu) edges.push_back(ij);
  return Digraph::make(std::move(nodes), std::move(edges));
}

inline void export_nu_tsv(const TransitionCounts& tc, std::ostream& out) {
  out << "i_cell\tnu\n";
  for (const auto& [i, count] : tc.nu) out << i << '\t' << count << '\n';
}

inline void export_mu_tsv(const TransitionCounts& tc, std::ostream& out) {
  out << "i_cell\tj_cell\tmu\n";
  for (const auto& [ij, count] : tc.mu)
    out << ij.first << '\t' << ij.second << '\t' << count << '\n';
}

inline void export_edges_tsv(const Digraph& g, std::ostream& out) {
  out << "from\tto\n";
  for (const auto& [u, v] : g.edges) out << u << '\t' << v << '\n';
}

inline void export_dot(const Digraph& g, std::ostream& out) {
  out << "digraph transitions {\n";
  for (NodeId v : g.nodes) out << "  n" << v << ";\n";
  for (const auto& [u, v] : g.edges) out << "  n" << u << " -> n" << v << ";\n";
  out << "}\n";
}

}  // namespace mgstd
