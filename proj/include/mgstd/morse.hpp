#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mgstd/grid.hpp"
#include "mgstd/transitions.hpp"

namespace mgstd {

/// Strongly connected components, Tarjan's algorithm with an explicit stack.
/// Output is canonical: each component sorted ascending, components sorted
/// by smallest member. Every node appears in exactly one component.
inline std::vector<std::vector<NodeId>> scc(const Digraph& g) {
  const std::size_t n = g.n();
  std::vector<std::size_t> head, targets;
  g.adjacency(head, targets);

  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), lowlink(n, 0);
  std::vector<bool> onstack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<NodeId>> comps;

  struct Frame {
    std::size_t v;
    std::size_t next_edge;
  };
  std::vector<Frame> frames;
  std::size_t counter = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    frames.push_back({root, head[root]});
    index[root] = lowlink[root] = counter++;
    stack.push_back(root);
    onstack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      const std::size_t v = f.v;
      if (f.next_edge < head[v + 1]) {
        const std::size_t w = targets[f.next_edge++];
        if (index[w] == kUnset) {
          index[w] = lowlink[w] = counter++;
          stack.push_back(w);
          onstack[w] = true;
          frames.push_back({w, head[w]});
        } else if (onstack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
      } else {
        frames.pop_back();
        if (!frames.empty()) {
          const std::size_t parent = frames.back().v;
          lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
        }
        if (lowlink[v] == index[v]) {
          std::vector<NodeId> comp;
          while (true) {
            const std::size_t w = stack.back();
            stack.pop_back();
            onstack[w] = false;
            comp.push_back(g.nodes[w]);
            if (w == v) break;
          }
          std::sort(comp.begin(), comp.end());
          comps.push_back(std::move(comp));
        }
      }
    }
  }
  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return comps;
}

/// Strict partial order between components: (j, i) is in the order iff some
/// path of g leads from component j into component i (paths may pass through
/// other components). Computed by DFS on the condensation DAG.
inline std::vector<std::pair<std::size_t, std::size_t>>
condensation_reachability(const Digraph& g,
                          const std::vector<std::vector<NodeId>>& components) {
  const std::size_t nc = components.size();
  std::vector<std::size_t> comp_of(g.n(), 0);
  for (std::size_t c = 0; c < nc; ++c)
    for (NodeId v : components[c]) comp_of[g.index_of(v)] = c;

  std::vector<std::set<std::size_t>> succ(nc);
  for (const auto& [u, v] : g.edges) {
    const std::size_t cu = comp_of[g.index_of(u)];
    const std::size_t cv = comp_of[g.index_of(v)];
    if (cu != cv) succ[cu].insert(cv);
  }

  std::vector<std::pair<std::size_t, std::size_t>> order;
  std::vector<char> seen(nc, 0);
  std::vector<std::size_t> dfs;
  for (std::size_t c = 0; c < nc; ++c) {
    std::fill(seen.begin(), seen.end(), 0);
    dfs.assign(succ[c].begin(), succ[c].end());
    while (!dfs.empty()) {
      const std::size_t w = dfs.back();
      dfs.pop_back();
      if (seen[w]) continue;
      seen[w] = 1;
      order.emplace_back(c, w);
      for (std::size_t x : succ[w])
        if (!seen[x]) dfs.push_back(x);
    }
  }
  std::sort(order.begin(), order.end());
  return order;
}

/// Unique minimal edge set whose transitive closure equals that of the
/// input DAG: an edge survives iff no two-or-more-step path joins its ends.
inline std::vector<std::pair<std::size_t, std::size_t>> transitive_reduction(
    std::vector<std::pair<std::size_t, std::size_t>> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<std::size_t> verts;
  for (const auto& [u, v] : edges) {
    if (u == v) throw numeric_error("transitive_reduction: self loop");
    verts.push_back(u);
    verts.push_back(v);
  }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  const std::size_t n = verts.size();
  const auto pos = [&](std::size_t v) {
    return static_cast<std::size_t>(
        std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
  };

  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& [u, v] : edges) {
    adj[pos(u)].push_back(pos(v));
    ++indeg[pos(v)];
  }
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) queue.push_back(i);
  std::size_t processed = 0;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    ++processed;
    for (std::size_t w : adj[queue[qi]])
      if (--indeg[w] == 0) queue.push_back(w);
  }
  if (processed != n)
    throw numeric_error("transitive_reduction: input contains a cycle");

  // Reachability closure by DFS from every vertex (inputs here are small).
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> dfs(adj[s]);
    while (!dfs.empty()) {
      const std::size_t w = dfs.back();
      dfs.pop_back();
      if (reach[s][w]) continue;
      reach[s][w] = 1;
      for (std::size_t x : adj[w])
        if (!reach[s][x]) dfs.push_back(x);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> reduced;
  for (const auto& [u, v] : edges) {
    bool redundant = false;
    for (std::size_t w = 0; w < n && !redundant; ++w)
      if (w != pos(u) && w != pos(v) && reach[pos(u)][w] && reach[w][pos(v)])
        redundant = true;
    if (!redundant) reduced.push_back({u, v});
  }
  return reduced;
}

/// Morse sets (nontrivial SCCs) of a digraph with their gradient-like order.
/// Sets are named MS0, MS1, ... by decreasing size, ties broken by smallest
/// cell id; order pairs (hi, lo) mean a path leads from set hi down to lo.
struct MorseDecomposition {
  Digraph digraph;
  std::vector<std::vector<NodeId>> morse_sets;
  std::vector<std::pair<std::size_t, std::size_t>> order;
  std::vector<std::pair<std::size_t, std::size_t>> reduced;

  std::size_t size() const { return morse_sets.size(); }
  static std::string name(std::size_t i) { return "MS" + std::to_string(i); }
};

inline MorseDecomposition morse_decomposition(const Digraph& g) {
  const auto comps = scc(g);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const bool nontrivial =
        comps[c].size() >= 2 || g.has_edge(comps[c][0], comps[c][0]);
    if (nontrivial) keep.push_back(c);
  }
  // Name by decreasing size, ties by smallest member cell id.
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    if (comps[a].size() != comps[b].size())
      return comps[a].size() > comps[b].size();
    return comps[a].front() < comps[b].front();
  });
  std::vector<std::size_t> rank(comps.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < keep.size(); ++i) rank[keep[i]] = i;

  MorseDecomposition md;
  md.digraph = g;
  for (std::size_t c : keep) md.morse_sets.push_back(comps[c]);

  const auto full = condensation_reachability(g, comps);
  for (const auto& [hi, lo] : full) {
    const std::size_t a = rank[hi], b = rank[lo];
    if (a != static_cast<std::size_t>(-1) && b != static_cast<std::size_t>(-1))
      md.order.emplace_back(a, b);
  }
  std::sort(md.order.begin(), md.order.end());
  for (const auto& [hi, lo] : md.order)
    if (hi == lo)
      throw numeric_error("morse decomposition: order is not irreflexive");
  md.reduced = transitive_reduction(md.order);
  return md;
}

/// Indices of the minimal Morse sets (no outgoing order pair): the sink
/// nodes of the Morse graph, the candidates for stable sets.
inline std::vector<std::size_t> combinatorial_attractors(
    const MorseDecomposition& md) {
  std::vector<char> has_out(md.size(), 0);
  for (const auto& [hi, lo] : md.order) has_out[hi] = 1;
  std::vector<std::size_t> mins;
  for (std::size_t i = 0; i < md.size(); ++i)
    if (!has_out[i]) mins.push_back(i);
  return mins;
}

/// The Morse graph: named nodes with sizes and barycenters, edges from the
/// transitive reduction.
struct MorseGraph {
  struct Node {
    std::string name;
    std::size_t set_size;
    std::vector<double> barycenter;
  };
  std::vector<Node> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

inline MorseGraph make_morse_graph(const MorseDecomposition& md,
                                   const GridSpec& grid) {
  MorseGraph mg;
  for (std::size_t i = 0; i < md.size(); ++i) {
    MorseGraph::Node node;
    node.name = MorseDecomposition::name(i);
    node.set_size = md.morse_sets[i].size();
    std::vector<double> mean(grid.dim(), 0.0);
    for (NodeId id : md.morse_sets[i]) {
      const auto c = grid.cell_center(id);
      for (int l = 0; l < grid.dim(); ++l) mean[l] += c[l];
    }
    for (double& v : mean) v /= static_cast<double>(node.set_size);
    node.barycenter = std::move(mean);
    mg.nodes.push_back(std::move(node));
  }
  mg.edges = md.reduced;
  return mg;
}

/// Deterministic DOT rendering; nodes labelled "MSk (size)" and ranked by
/// topological depth. Unit-size sets are drawn dashed and unfilled: slow
/// dynamics can promote a single recurrent cell to a Morse set, so they
/// deserve suspicion rather than removal.
inline std::string export_dot(const MorseGraph& mg) {
  const std::size_t n = mg.nodes.size();
  std::vector<std::size_t> depth(n, 0);
  bool changed = true;
  std::size_t guard = 0;
  while (changed && guard++ <= n + 1) {
    changed = false;
    for (const auto& [hi, lo] : mg.edges)
      if (depth[lo] < depth[hi] + 1) {
        depth[lo] = depth[hi] + 1;
        changed = true;
      }
  }
  std::string out = "digraph morse {\n";
  out += "  rankdir=TB;\n  node [shape=box];\n";
  for (std::size_t i = 0; i < n; ++i) {
    const char* style = mg.nodes[i].set_size >= 2
                            ? "style=filled, fillcolor=lightgray"
                            : "style=dashed";
    out += "  " + mg.nodes[i].name + " [label=\"" + mg.nodes[i].name + " (" +
           std::to_string(mg.nodes[i].set_size) + ")\", " + style + "];\n";
  }
  std::size_t max_depth = 0;
  for (std::size_t i = 0; i < n; ++i) max_depth = std::max(max_depth, depth[i]);
  for (std::size_t d = 0; d <= max_depth && n > 0; ++d) {
    std::string rank;
    for (std::size_t i = 0; i < n; ++i)
      if (depth[i] == d) rank += " " + mg.nodes[i].name + ";";
    if (!rank.empty()) out += "  { rank=same;" + rank + " }\n";
  }
  for (const auto& [hi, lo] : mg.edges)
    out += "  " + mg.nodes[hi].name + " -> " + mg.nodes[lo].name + ";\n";
  out += "}\n";
  return out;
}

/// JSON form {sets:[[cell,...]], order:[[hi,lo]], reduced:[[hi,lo]]}.
inline std::string to_json(const MorseDecomposition& md) {
  std::string out = "{\"sets\":[";
  for (std::size_t i = 0; i < md.size(); ++i) {
    if (i) out += ",";
    out += "[";
    for (std::size_t k = 0; k < md.morse_sets[i].size(); ++k) {
      if (k) out += ",";
      out += std::to_string(md.morse_sets[i][k]);
    }
    out += "]";
  }
  out += "],\"order\":[";
  for (std::size_t i = 0; i < md.order.size(); ++i) {
    if (i) out += ",";
    out += "[" + std::to_string(md.order[i].first) + "," +
           std::to_string(md.order[i].second) + "]";
  }
  out += "],\"reduced\":[";
  for (std::size_t i = 0; i < md.reduced.size(); ++i) {
    if (i) out += ",";
    out += "[" + std::to_string(md.reduced[i].first) + "," +
           std::to_string(md.reduced[i].second) + "]";
  }
  out += "]}";
  return out;
}

}  // namespace mgstd
