#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mgstd/mgstd.hpp"

using mgstd::Digraph;
using mgstd::MorseDecomposition;
using mgstd::MorseGraph;
using mgstd::NodeId;

namespace {

Digraph mk(std::vector<NodeId> nodes,
           std::vector<std::pair<NodeId, NodeId>> edges) {
  return Digraph::make(std::move(nodes), std::move(edges));
}

// Floyd-Warshall closure over node positions; r[i][j] means a path of at
// least one edge leads from node i to node j.
std::vector<std::vector<char>> reach_closure(const Digraph& g) {
  const std::size_t n = g.n();
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (const auto& [u, v] : g.edges) r[g.index_of(u)][g.index_of(v)] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = 1;
  return r;
}

std::set<std::pair<std::size_t, std::size_t>> pair_closure(
    const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::set<std::pair<std::size_t, std::size_t>> c(edges.begin(), edges.end());
  bool grew = true;
  while (grew) {
    grew = false;
    const std::vector<std::pair<std::size_t, std::size_t>> snap(c.begin(),
                                                                c.end());
    for (const auto& [a, b] : snap)
      for (const auto& [x, y] : snap)
        if (b == x && c.insert({a, y}).second) grew = true;
  }
  return c;
}

Digraph random_digraph(std::uint64_t seed, std::size_t n, double p) {
  mgstd::PhiloxStream rng(seed, 0);
  std::vector<NodeId> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(3 * static_cast<NodeId>(i) + 1);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u : nodes)
    for (NodeId v : nodes)
      if (rng.uniform() < p) edges.push_back({u, v});
  return Digraph::make(std::move(nodes), std::move(edges));
}

}  // namespace

TEST_CASE("digraph construction canonicalizes and validates") {
  const Digraph g = mk({5, 1, 3, 1}, {{3, 1}, {5, 3}, {3, 1}});
  CHECK(g.nodes == std::vector<NodeId>{1, 3, 5});
  CHECK(g.edges == std::vector<std::pair<NodeId, NodeId>>{{3, 1}, {5, 3}});
  CHECK(g.index_of(3) == 1);
  CHECK_THROWS_AS(g.index_of(2), std::invalid_argument);
  CHECK_THROWS_AS(mk({1, 2}, {{1, 7}}), std::invalid_argument);
}

TEST_CASE("scc finds maximal strongly connected components") {
  SECTION("a two-cycle plus an isolated node") {
    const Digraph g = mk({1, 2, 9}, {{1, 2}, {2, 1}});
    const auto comps = mgstd::scc(g);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0] == std::vector<NodeId>{1, 2});
    CHECK(comps[1] == std::vector<NodeId>{9});
  }
  SECTION("a DAG decomposes into singletons") {
    const Digraph g =
        mk({0, 1, 2, 3, 4}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}});
    const auto comps = mgstd::scc(g);
    REQUIRE(comps.size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
      CHECK(comps[i] == std::vector<NodeId>{static_cast<NodeId>(i)});
  }
  SECTION("random digraphs match a pairwise-reachability oracle") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const Digraph g = random_digraph(seed, 12, 0.15);
      const auto reach = reach_closure(g);
      std::vector<std::vector<NodeId>> expect;
      std::vector<char> placed(g.n(), 0);
      for (std::size_t i = 0; i < g.n(); ++i) {
        if (placed[i]) continue;
        std::vector<NodeId> comp{g.nodes[i]};
        placed[i] = 1;
        for (std::size_t j = i + 1; j < g.n(); ++j)
          if (reach[i][j] && reach[j][i]) {
            comp.push_back(g.nodes[j]);
            placed[j] = 1;
          }
        expect.push_back(std::move(comp));
      }
      CHECK(mgstd::scc(g) == expect);
    }
  }
}

TEST_CASE("morse decomposition keeps nontrivial components, ordered by size") {
  SECTION("a two-cycle draining into a self-loop") {
    const Digraph g = mk({10, 11, 12}, {{10, 11}, {11, 10}, {11, 12}, {12, 12}});
    const MorseDecomposition md = mgstd::morse_decomposition(g);
    REQUIRE(md.size() == 2);
    CHECK(md.morse_sets[0] == std::vector<NodeId>{10, 11});
    CHECK(md.morse_sets[1] == std::vector<NodeId>{12});
    CHECK(md.order ==
          std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
    CHECK(md.reduced == md.order);
    CHECK(mgstd::to_json(md) ==
          "{\"sets\":[[10,11],[12]],\"order\":[[0,1]],\"reduced\":[[0,1]]}");
  }
  SECTION("a DAG yields an empty decomposition") {
    const Digraph g = mk({0, 1, 2}, {{0, 1}, {1, 2}});
    const MorseDecomposition md = mgstd::morse_decomposition(g);
    CHECK(md.size() == 0);
    CHECK(mgstd::combinatorial_attractors(md).empty());
    CHECK(mgstd::to_json(md) == "{\"sets\":[],\"order\":[],\"reduced\":[]}");
  }
  SECTION("a source set draining into two sinks") {
    const Digraph g = mk({1, 2, 3, 4, 5, 6, 7, 8},
                         {{1, 2}, {2, 1}, {4, 5}, {5, 4}, {7, 8}, {8, 7},
                          {4, 3}, {3, 1}, {5, 6}, {6, 7}});
    const MorseDecomposition md = mgstd::morse_decomposition(g);
    REQUIRE(md.size() == 3);
    // Equal sizes, so names follow the smallest member.
    CHECK(md.morse_sets[0] == std::vector<NodeId>{1, 2});
    CHECK(md.morse_sets[1] == std::vector<NodeId>{4, 5});
    CHECK(md.morse_sets[2] == std::vector<NodeId>{7, 8});
    CHECK(md.order == std::vector<std::pair<std::size_t, std::size_t>>{
                          {1, 0}, {1, 2}});
    CHECK(md.reduced == md.order);
    CHECK(mgstd::combinatorial_attractors(md) ==
          std::vector<std::size_t>{0, 2});
  }
  SECTION("size outranks position in the naming") {
    const Digraph g = mk({0, 5, 6, 7},
                         {{0, 0}, {5, 6}, {6, 7}, {7, 5}});
    const MorseDecomposition md = mgstd::morse_decomposition(g);
    REQUIRE(md.size() == 2);
    CHECK(md.morse_sets[0] == std::vector<NodeId>{5, 6, 7});
    CHECK(md.morse_sets[1] == std::vector<NodeId>{0});
  }
  SECTION("a single Morse set is its own attractor") {
    const Digraph g = mk({3, 4}, {{3, 4}, {4, 3}});
    const MorseDecomposition md = mgstd::morse_decomposition(g);
    REQUIRE(md.size() == 1);
    CHECK(mgstd::combinatorial_attractors(md) == std::vector<std::size_t>{0});
  }
}

TEST_CASE("condensation reachability includes paths through trivial cells") {
  SECTION("a gradient-like cell bridges two Morse sets") {
    const Digraph g = mk({0, 1, 2, 3, 4},
                         {{0, 1}, {1, 0}, {1, 2}, {2, 3}, {3, 4}, {4, 3}});
    const auto comps = mgstd::scc(g);
    REQUIRE(comps.size() == 3);
    const auto order = mgstd::condensation_reachability(g, comps);
    CHECK(order == std::vector<std::pair<std::size_t, std::size_t>>{
                       {0, 1}, {0, 2}, {1, 2}});
    const MorseDecomposition md = mgstd::morse_decomposition(g);
    CHECK(md.order ==
          std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
  }
  SECTION("disconnected Morse sets have an empty order") {
    const Digraph g = mk({0, 1, 5, 6}, {{0, 1}, {1, 0}, {5, 6}, {6, 5}});
    CHECK(mgstd::morse_decomposition(g).order.empty());
  }
}

TEST_CASE("transitive reduction is the unique minimal generator") {
  using Edges = std::vector<std::pair<std::size_t, std::size_t>>;
  SECTION("a shortcut edge is removed") {
    CHECK(mgstd::transitive_reduction({{0, 1}, {1, 2}, {0, 2}}) ==
          Edges{{0, 1}, {1, 2}});
  }
  SECTION("an already reduced chain is unchanged") {
    CHECK(mgstd::transitive_reduction({{0, 1}, {1, 2}, {2, 3}}) ==
          Edges{{0, 1}, {1, 2}, {2, 3}});
  }
  SECTION("cycles and self loops are rejected") {
    CHECK_THROWS_AS(mgstd::transitive_reduction({{0, 1}, {1, 0}}),
                    mgstd::numeric_error);
    CHECK_THROWS_AS(mgstd::transitive_reduction({{2, 2}}),
                    mgstd::numeric_error);
  }
  SECTION("random DAGs: same closure, and no edge is removable") {
    mgstd::PhiloxStream rng(77, 0);
    for (int trial = 0; trial < 40; ++trial) {
      Edges edges;
      for (std::size_t u = 0; u < 9; ++u)
        for (std::size_t v = u + 1; v < 9; ++v)
          if (rng.uniform() < 0.3) edges.push_back({u, v});
      const Edges reduced = mgstd::transitive_reduction(edges);
      const auto full = pair_closure(edges);
      CHECK(pair_closure(reduced) == full);
      for (const auto& e : reduced)
        CHECK(std::count(edges.begin(), edges.end(), e) == 1);
      for (std::size_t drop = 0; drop < reduced.size(); ++drop) {
        Edges fewer = reduced;
        fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(drop));
        CHECK(pair_closure(fewer) != full);
      }
    }
  }
}

TEST_CASE("decomposition invariants hold on random digraphs") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const Digraph g = random_digraph(seed, 12, 0.18);
    const MorseDecomposition md = mgstd::morse_decomposition(g);
    const auto reach = reach_closure(g);

    std::map<NodeId, std::size_t> set_of;
    for (std::size_t s = 0; s < md.size(); ++s)
      for (NodeId v : md.morse_sets[s]) {
        CHECK(set_of.count(v) == 0);  // pairwise disjoint
        set_of[v] = s;
      }

    // Every mutually reachable pair and every self-loop node sits inside
    // exactly one Morse set.
    for (std::size_t i = 0; i < g.n(); ++i) {
      if (g.has_edge(g.nodes[i], g.nodes[i]))
        CHECK(set_of.count(g.nodes[i]) == 1);
      for (std::size_t j = i + 1; j < g.n(); ++j)
        if (reach[i][j] && reach[j][i]) {
          REQUIRE(set_of.count(g.nodes[i]) == 1);
          CHECK(set_of[g.nodes[i]] == set_of[g.nodes[j]]);
        }
    }

    // The stored order is irreflexive, transitive, and matches reachability
    // between the sets.
    const std::set<std::pair<std::size_t, std::size_t>> order_set(
        md.order.begin(), md.order.end());
    CHECK(pair_closure(md.order) == order_set);
    for (const auto& [hi, lo] : md.order) CHECK(hi != lo);
    std::set<std::pair<std::size_t, std::size_t>> expect;
    for (std::size_t a = 0; a < md.size(); ++a)
      for (std::size_t b = 0; b < md.size(); ++b) {
        if (a == b) continue;
        const std::size_t u = g.index_of(md.morse_sets[a].front());
        const std::size_t v = g.index_of(md.morse_sets[b].front());
        if (reach[u][v]) expect.insert({a, b});
      }
    CHECK(order_set == expect);

    // The reduction regenerates the order and every reduced edge has a
    // concrete witness path in the digraph.
    CHECK(pair_closure(md.reduced) == order_set);
    for (const auto& [hi, lo] : md.reduced) {
      const std::size_t u = g.index_of(md.morse_sets[hi].front());
      const std::size_t v = g.index_of(md.morse_sets[lo].front());
      CHECK(reach[u][v]);
    }

    // Attractors are exactly the sets without outgoing order pairs.
    const auto mins = mgstd::combinatorial_attractors(md);
    for (std::size_t s = 0; s < md.size(); ++s) {
      bool has_out = false;
      for (const auto& [hi, lo] : md.order) has_out |= (hi == s);
      const bool is_min =
          std::count(mins.begin(), mins.end(), s) == 1;
      CHECK(is_min == !has_out);
    }

    // Names never depend on construction order.
    std::vector<NodeId> nodes_rev(g.nodes.rbegin(), g.nodes.rend());
    std::vector<std::pair<NodeId, NodeId>> edges_rev(g.edges.rbegin(),
                                                     g.edges.rend());
    const MorseDecomposition md2 = mgstd::morse_decomposition(
        Digraph::make(std::move(nodes_rev), std::move(edges_rev)));
    CHECK(mgstd::to_json(md2) == mgstd::to_json(md));
  }
}

TEST_CASE("the Morse graph carries names, sizes, and barycenters") {
  const mgstd::GridSpec grid(1, 0.25, 4.0, {0.0});
  const Digraph g = mk({10, 11, 12}, {{10, 11}, {11, 10}, {11, 12}, {12, 12}});
  const MorseGraph mg =
      mgstd::make_morse_graph(mgstd::morse_decomposition(g), grid);
  REQUIRE(mg.nodes.size() == 2);
  CHECK(mg.nodes[0].name == "MS0");
  CHECK(mg.nodes[0].set_size == 2);
  CHECK(mg.nodes[0].barycenter[0] == Catch::Approx(-1.25));
  CHECK(mg.nodes[1].name == "MS1");
  CHECK(mg.nodes[1].barycenter[0] == Catch::Approx(-0.875));
  CHECK(mg.edges ==
        std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
}

TEST_CASE("DOT export is deterministic text") {
  const mgstd::GridSpec grid(1, 0.25, 4.0, {0.0});
  SECTION("two sets, one edge") {
    const Digraph g =
        mk({0, 1, 2, 3}, {{0, 1}, {1, 0}, {1, 2}, {2, 3}, {3, 2}});
    const MorseGraph mg =
        mgstd::make_morse_graph(mgstd::morse_decomposition(g), grid);
    const std::string dot = mgstd::export_dot(mg);
    CHECK(dot ==
          "digraph morse {\n"
          "  rankdir=TB;\n"
          "  node [shape=box];\n"
          "  MS0 [label=\"MS0 (2)\", style=filled, fillcolor=lightgray];\n"
          "  MS1 [label=\"MS1 (2)\", style=filled, fillcolor=lightgray];\n"
          "  { rank=same; MS0; }\n"
          "  { rank=same; MS1; }\n"
          "  MS0 -> MS1;\n"
          "}\n");
    CHECK(mgstd::export_dot(mg) == dot);
  }
  SECTION("unit-size sets are drawn dashed") {
    const Digraph g = mk({5}, {{5, 5}});
    const MorseGraph mg =
        mgstd::make_morse_graph(mgstd::morse_decomposition(g), grid);
    CHECK(mgstd::export_dot(mg) ==
          "digraph morse {\n"
          "  rankdir=TB;\n"
          "  node [shape=box];\n"
          "  MS0 [label=\"MS0 (1)\", style=dashed];\n"
          "  { rank=same; MS0; }\n"
          "}\n");
  }
  SECTION("empty decomposition renders an empty block") {
    const Digraph g = mk({0, 1}, {{0, 1}});
    const MorseGraph mg =
        mgstd::make_morse_graph(mgstd::morse_decomposition(g), grid);
    CHECK(mgstd::export_dot(mg) ==
          "digraph morse {\n"
          "  rankdir=TB;\n"
          "  node [shape=box];\n"
          "}\n");
  }
}
