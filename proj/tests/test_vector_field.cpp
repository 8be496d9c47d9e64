#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mgstd/mgstd.hpp"

using mgstd::ArrowDirection;
using mgstd::CenterWeighting;
using mgstd::Dataset;
using mgstd::EdgeVector;
using mgstd::GridSpec;
using mgstd::MorseDecomposition;
using mgstd::NodeId;
using mgstd::ShiftField;
using mgstd::VectorField;

namespace {

// Cells come back from locate so the tests stay independent of the
// linearization order.
NodeId cell_at(const GridSpec& g, std::vector<double> p) {
  return g.locate_linear(p);
}

// A 2D Morse set of `pairs` point-symmetric cell pairs; the barycenter is
// exactly `center` because paired cell centers average to it.
std::vector<NodeId> symmetric_set(const GridSpec& g, int pairs,
                                  double cx) {
  std::vector<NodeId> cells;
  const double off = 4.0;  // grid half-width used below
  for (int k = 0; k < pairs; ++k) {
    const int i = k, j = (2 * k) % 32;
    const double x1 = -off + 0.25 * (i + 0.5), y1 = -off + 0.25 * (j + 0.5);
    cells.push_back(cell_at(g, {cx + x1, y1}));
    cells.push_back(cell_at(g, {cx - x1, -y1}));
  }
  return cells;
}

EdgeVector arrow(std::vector<double> q, std::vector<double> v) {
  EdgeVector ev;
  ev.q = std::move(q);
  ev.v = std::move(v);
  return ev;
}

std::string tsv_of(const VectorField& vf) {
  std::ostringstream out;
  mgstd::export_tsv(vf, out);
  return out.str();
}

}  // namespace

TEST_CASE("edge vectors sit on the division point with averaged-size length") {
  const GridSpec g(2, 0.25, 8.0, {0.0, 0.0});
  MorseDecomposition md;
  md.reduced = {{0, 1}};
  md.order = {{0, 1}};

  SECTION("equal sizes put the arrow at the midpoint") {
    md.morse_sets = {symmetric_set(g, 5, 0.0), symmetric_set(g, 5, 1.0)};
    REQUIRE(mgstd::barycenter(md.morse_sets[0], g) ==
            std::vector<double>{0.0, 0.0});
    REQUIRE(mgstd::barycenter(md.morse_sets[1], g) ==
            std::vector<double>{1.0, 0.0});

    const auto flow = mgstd::edge_vectors(md, g, ArrowDirection::flow);
    REQUIRE(flow.size() == 1);
    CHECK(flow[0].q == std::vector<double>{0.5, 0.0});
    CHECK(flow[0].v == std::vector<double>{10.0, 0.0});
    CHECK(flow[0].src == 0);
    CHECK(flow[0].dst == 1);
    CHECK(flow[0].src_size == 10);
    CHECK(flow[0].dst_size == 10);

    // The default direction points back from descendant to ancestor.
    const auto def = mgstd::edge_vectors(md, g);
    REQUIRE(def.size() == 1);
    CHECK(def[0].q == std::vector<double>{0.5, 0.0});
    CHECK(def[0].v == std::vector<double>{-10.0, 0.0});
  }
  SECTION("a 30:10 edge divides the segment three quarters along") {
    md.morse_sets = {symmetric_set(g, 15, 0.0), symmetric_set(g, 5, 1.0)};
    const auto vecs = mgstd::edge_vectors(md, g, ArrowDirection::flow);
    REQUIRE(vecs.size() == 1);
    CHECK(vecs[0].q == std::vector<double>{0.75, 0.0});
    CHECK(vecs[0].v == std::vector<double>{20.0, 0.0});
    CHECK(std::hypot(vecs[0].v[0], vecs[0].v[1]) == 20.0);

    const auto tm = mgstd::edge_vectors(md, g, ArrowDirection::flow,
                                        CenterWeighting::target_major);
    REQUIRE(tm.size() == 1);
    CHECK(tm[0].q == std::vector<double>{0.25, 0.0});
    CHECK(tm[0].v == std::vector<double>{20.0, 0.0});
  }
  SECTION("coincident barycenters are skipped") {
    md.morse_sets = {symmetric_set(g, 5, 0.0), symmetric_set(g, 7, 0.0)};
    CHECK(mgstd::edge_vectors(md, g).empty());
  }
  SECTION("the full order produces one arrow per order pair") {
    md.morse_sets = {symmetric_set(g, 5, -1.0), symmetric_set(g, 5, 0.0),
                     symmetric_set(g, 5, 1.0)};
    md.order = {{0, 1}, {0, 2}, {1, 2}};
    md.reduced = {{0, 1}, {1, 2}};
    CHECK(mgstd::edge_vectors(md, g).size() == 2);
    CHECK(mgstd::edge_vectors(md, g, ArrowDirection::antiflow,
                              CenterWeighting::source_major, true)
              .size() == 3);
  }
}

TEST_CASE("a small source draining into a larger sink on a line") {
  const GridSpec g(1, 0.25, 4.0, {0.0});
  MorseDecomposition md;
  md.morse_sets = {{15, 16}, {18, 19, 20, 21}};
  md.order = {{0, 1}};
  md.reduced = {{0, 1}};
  REQUIRE(mgstd::barycenter(md.morse_sets[0], g) == std::vector<double>{0.0});
  REQUIRE(mgstd::barycenter(md.morse_sets[1], g) == std::vector<double>{1.0});

  const auto vecs = mgstd::edge_vectors(md, g, ArrowDirection::flow);
  REQUIRE(vecs.size() == 1);
  CHECK(vecs[0].q[0] == 1.0 / 3.0);
  CHECK(vecs[0].v[0] == 3.0);
  CHECK(mgstd::edge_vectors(md, g)[0].v[0] == -3.0);
}

TEST_CASE("shift fields average arrow vectors per cell") {
  const GridSpec g(1, 0.25, 0.5, {0.0});
  SECTION("one arrow passes through unchanged") {
    const ShiftField f = mgstd::shift_field({arrow({0.1}, {1.5})}, g);
    REQUIRE(f.v.size() == 1);
    CHECK(f.v.at(cell_at(g, {0.1})) == std::vector<double>{1.5});
    CHECK(f.support.at(cell_at(g, {0.1})) == 1);
  }
  SECTION("opposite arrows cancel but keep their support") {
    const ShiftField f = mgstd::shift_field(
        {arrow({0.05}, {2.0}), arrow({0.2}, {-2.0})}, g);
    REQUIRE(f.v.size() == 1);
    CHECK(f.v.at(cell_at(g, {0.1})) == std::vector<double>{0.0});
    CHECK(f.support.at(cell_at(g, {0.1})) == 2);
  }
  SECTION("arrows in distinct cells never interact") {
    const ShiftField f = mgstd::shift_field(
        {arrow({0.1}, {1.0}), arrow({-0.3}, {7.0})}, g);
    REQUIRE(f.v.size() == 2);
    CHECK(f.v.at(cell_at(g, {0.1})) == std::vector<double>{1.0});
    CHECK(f.v.at(cell_at(g, {-0.3})) == std::vector<double>{7.0});
  }
  SECTION("centers outside the domain are dropped") {
    const ShiftField f = mgstd::shift_field({arrow({9.0}, {1.0})}, g);
    CHECK(f.v.empty());
  }
}

TEST_CASE("canonical averaging pools shifted cells by their centers") {
  SECTION("a lone unshifted field is reproduced cell for cell") {
    const GridSpec g(1, 0.25, 0.5, {0.0});
    const ShiftField f = mgstd::shift_field(
        {arrow({0.1}, {1.5}), arrow({-0.4}, {-0.5})}, g);
    const VectorField vf = mgstd::canonical_average({f});
    CHECK(vf.grid.L() == 0.5);
    CHECK(vf.w.size() == 2);
    for (const auto& [cell, vec] : f.v) {
      CHECK(vf.w.at(cell) == vec);
      CHECK(vf.support.at(cell) == f.support.at(cell));
    }
  }
  SECTION("two shifts landing in one canonical cell average out") {
    // Shift 0 puts a center at 0.375, shift 0.125 one at 0.25; both fall
    // in the widened canonical grid's cell [0.25, 0.5).
    const GridSpec g0(1, 0.25, 0.5, {0.0});
    const GridSpec g1(1, 0.25, 0.5, {0.125});
    const ShiftField f0 = mgstd::shift_field({arrow({0.3}, {2.0})}, g0);
    const ShiftField f1 = mgstd::shift_field({arrow({0.2}, {-2.0})}, g1);
    REQUIRE(g0.cell_center(f0.v.begin()->first) ==
            std::vector<double>{0.375});
    REQUIRE(g1.cell_center(f1.v.begin()->first) ==
            std::vector<double>{0.25});

    const VectorField vf = mgstd::canonical_average({f0, f1});
    CHECK(vf.grid.L() == 0.75);
    REQUIRE(vf.w.size() == 1);
    const NodeId q = vf.w.begin()->first;
    CHECK(vf.grid.cell_center(q) == std::vector<double>{0.375});
    CHECK(vf.w.at(q) == std::vector<double>{0.0});
    CHECK(vf.support.at(q) == 2);
  }
  SECTION("a shifted 2D cell maps by the locate convention") {
    const GridSpec g(2, 0.25, 0.25, {0.125, 0.0});
    const ShiftField f =
        mgstd::shift_field({arrow({0.3, -0.1}, {1.0, -1.0})}, g);
    REQUIRE(f.v.size() == 1);
    REQUIRE(g.cell_center(f.v.begin()->first) ==
            std::vector<double>{0.25, -0.125});

    const VectorField vf = mgstd::canonical_average({f});
    CHECK(vf.grid.L() == 0.5);
    REQUIRE(vf.w.size() == 1);
    const NodeId q = vf.w.begin()->first;
    CHECK(vf.grid.cell_center(q) == std::vector<double>{0.375, -0.125});
    CHECK(vf.w.at(q) == std::vector<double>{1.0, -1.0});
  }
  SECTION("mixed grids are rejected") {
    const ShiftField a{GridSpec(1, 0.25, 0.5, {0.0}), {}, {}};
    const ShiftField b{GridSpec(1, 0.5, 1.0, {0.0}), {}, {}};
    const ShiftField c{GridSpec(2, 0.25, 0.5, {0.0, 0.0}), {}, {}};
    CHECK_THROWS_AS(mgstd::canonical_average({a, b}), std::invalid_argument);
    CHECK_THROWS_AS(mgstd::canonical_average({a, c}), std::invalid_argument);
    CHECK_THROWS_AS(mgstd::canonical_average({}), std::invalid_argument);
  }
}

TEST_CASE("the shift lattice walks every axis in steps below h") {
  const auto one = mgstd::shift_lattice(1, 0.25, 0.01);
  REQUIRE(one.size() == 25);
  CHECK(one.front() == std::vector<double>{0.0});
  CHECK(one.back()[0] == Catch::Approx(0.24));

  const auto two = mgstd::shift_lattice(2, 0.25, 0.1);
  REQUIRE(two.size() == 9);
  CHECK(two[0] == std::vector<double>{0.0, 0.0});
  CHECK(two[1] == std::vector<double>{0.0, 0.1});
  CHECK(two[3] == std::vector<double>{0.1, 0.0});
  CHECK(two[8] == std::vector<double>{0.2, 0.2});

  CHECK(mgstd::shift_lattice(1, 0.25, 0.25) ==
        std::vector<std::vector<double>>{{0.0}});
  CHECK_THROWS_AS(mgstd::shift_lattice(1, 0.25, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(mgstd::shift_lattice(1, 0.25, 0.0), std::invalid_argument);
}

namespace {

// One well around -1, a single crossing, one well around +1: every shift
// below 0.25 sees two 2-cell Morse sets with a left-to-right connection.
Dataset two_well_walk(double offset) {
  Dataset d(1);
  d.add_series("walk");
  for (int r = 0; r < 15; ++r) {
    d.push_point({offset - 1.05});
    d.push_point({offset - 0.8});
  }
  d.push_point({offset - 1.05});
  d.push_point({offset + 0.8});
  for (int r = 0; r < 15; ++r) {
    d.push_point({offset + 1.05});
    d.push_point({offset + 0.8});
  }
  d.add_series("sentinel");
  d.push_point({3.5});
  return d;
}

}  // namespace

TEST_CASE("the full pipeline is shift-stable and translation-equivariant") {
  mgstd::MgstdOptions opt;
  opt.shift_increment = 0.05;
  opt.mu_star = 1;

  const mgstd::MgstdResult a = mgstd::run_mgstd(two_well_walk(0.0), 0.25, opt);
  REQUIRE(a.shifts.size() == 5);
  for (const auto& s : a.shifts) {
    CHECK(s.decomposition.size() == 2);
    CHECK(s.vectors.size() == 1);
  }
  REQUIRE_FALSE(a.field.w.empty());

  SECTION("worker count does not change the result") {
    mgstd::MgstdOptions par = opt;
    par.jobs = 4;
    const mgstd::MgstdResult b =
        mgstd::run_mgstd(two_well_walk(0.0), 0.25, par);
    CHECK(tsv_of(b.field) == tsv_of(a.field));
  }
  SECTION("translating the data by one cell translates the field") {
    const mgstd::MgstdResult b =
        mgstd::run_mgstd(two_well_walk(0.25), 0.25, opt);
    CHECK(b.field.grid.L() == a.field.grid.L());
    REQUIRE(b.field.w.size() == a.field.w.size());
    for (const auto& [cell, vec] : a.field.w) {
      const std::vector<double> c = a.field.grid.cell_center(cell);
      const NodeId moved = b.field.grid.locate_linear({c[0] + 0.25});
      REQUIRE(b.field.w.count(moved) == 1);
      CHECK(b.field.support.at(moved) == a.field.support.at(cell));
      CHECK(b.field.w.at(moved)[0] ==
            Catch::Approx(vec[0]).margin(1e-12));
    }
  }
  SECTION("a dataset with one Morse set yields an empty field") {
    Dataset flat(1);
    flat.add_series("s");
    flat.push_point({0.6});
    flat.push_point({0.6});
    const mgstd::MgstdResult r = mgstd::run_mgstd(flat, 0.25, opt);
    CHECK(r.shifts.size() == 5);
    CHECK(r.field.w.empty());
    for (const auto& s : r.shifts) {
      CHECK(s.decomposition.size() == 1);
      CHECK(s.vectors.empty());
    }
  }
}

TEST_CASE("the quiver export is fixed-format TSV") {
  const GridSpec g(1, 0.25, 0.5, {0.0});
  const ShiftField f = mgstd::shift_field(
      {arrow({0.1}, {1.5}), arrow({0.3}, {-2.5})}, g);
  CHECK(tsv_of(mgstd::canonical_average({f})) ==
        "# q1\tw1\tsupport\n"
        "0.125\t1.5\t1\n"
        "0.375\t-2.5\t1\n");

  const GridSpec g2(2, 0.25, 0.25, {0.0, 0.0});
  const ShiftField f2 = mgstd::shift_field(
      {arrow({0.1, 0.1}, {0.5, -0.5})}, g2);
  CHECK(tsv_of(mgstd::canonical_average({f2})) ==
        "# q1\tq2\tw1\tw2\tsupport\n"
        "0.125\t0.125\t0.5\t-0.5\t1\n");
}
