#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mgstd/dataset.hpp"
#include "mgstd/errors.hpp"
#include "mgstd/grid.hpp"
#include "mgstd/morse.hpp"
#include "mgstd/transitions.hpp"

namespace mgstd {

/// Sign convention for the arrow along a Morse-graph edge MSi -> MSj.
/// `antiflow`, the default, is parallel to p_i - p_j: it points from the
/// descendant's barycenter back toward its ancestor's. `flow` is the
/// reverse, the direction trajectories move.
enum class ArrowDirection { flow, antiflow };

/// Which size goes in front when placing the arrow center on the segment
/// p_i -> p_j: `source_major` puts it at the size_i : size_j internal
/// division point (closer to p_j when the source set is larger).
enum class CenterWeighting { source_major, target_major };

/// One arrow of the transition vector field: placed at q, vector v in
/// grid-cell units, |v| = (size_i + size_j)/2.
struct EdgeVector {
  std::vector<double> q;
  std::vector<double> v;
  std::size_t src = 0, dst = 0;
  std::size_t src_size = 0, dst_size = 0;
};

/// One vector per Morse-graph edge (reduced edges by default, the full
/// order on request). Edges with coincident barycenters are skipped.
inline std::vector<EdgeVector> edge_vectors(
    const MorseDecomposition& md, const GridSpec& grid,
    ArrowDirection direction = ArrowDirection::antiflow,
    CenterWeighting weighting = CenterWeighting::source_major,
    bool use_full_order = false) {
  const auto& pairs = use_full_order ? md.order : md.reduced;
  const int m = grid.dim();
  std::vector<std::vector<double>> bary(md.size());
  for (std::size_t i = 0; i < md.size(); ++i)
    bary[i] = barycenter(md.morse_sets[i], grid);

  std::vector<EdgeVector> out;
  for (const auto& [i, j] : pairs) {
    const auto& pi = bary[i];
    const auto& pj = bary[j];
    double dist2 = 0.0;
    for (int l = 0; l < m; ++l) dist2 += (pj[l] - pi[l]) * (pj[l] - pi[l]);
    const double dist = std::sqrt(dist2);
    if (!(dist > 1e-14)) continue;  // direction undefined
    const double size_i = static_cast<double>(md.morse_sets[i].size());
    const double size_j = static_cast<double>(md.morse_sets[j].size());
    const double len = 0.5 * (size_i + size_j);
    const double tfrac = (weighting == CenterWeighting::source_major)
                             ? size_i / (size_i + size_j)
                             : size_j / (size_i + size_j);
    EdgeVector ev;
    ev.q.resize(m);
    ev.v.resize(m);
    for (int l = 0; l < m; ++l) {
      const double step = pj[l] - pi[l];
      ev.q[l] = pi[l] + tfrac * step;
      const double unit = step / dist;
      ev.v[l] = (direction == ArrowDirection::flow ? unit : -unit) * len;
    }
    ev.src = i;
    ev.dst = j;
    ev.src_size = md.morse_sets[i].size();
    ev.dst_size = md.morse_sets[j].size();
    out.push_back(std::move(ev));
  }
  return out;
}

/// Cellwise mean of arrows over one shifted grid: v_R = mean of the v with
/// center q in R. Cells receiving no centers are absent; arrows whose
/// centers fall outside the domain are dropped.
struct ShiftField {
  GridSpec grid;
  std::map<NodeId, std::vector<double>> v;
  std::map<NodeId, std::int64_t> support;
};

inline ShiftField shift_field(const std::vector<EdgeVector>& vectors,
                              const GridSpec& grid) {
  ShiftField f{grid, {}, {}};
  const int m = grid.dim();
  for (const EdgeVector& ev : vectors) {
    NodeId cell;
    try {
      cell = grid.locate_linear(ev.q);
    } catch (const out_of_domain_error&) {
      continue;
    }
    auto [it, fresh] = f.v.try_emplace(cell, std::vector<double>(m, 0.0));
    for (int l = 0; l < m; ++l) it->second[l] += ev.v[l];
    ++f.support[cell];
  }
  for (auto& [cell, vec] : f.v) {
    const double n = static_cast<double>(f.support[cell]);
    for (double& c : vec) c /= n;
  }
  return f;
}

/// The averaged field w(Q) on the canonical (delta = 0) grid.
struct VectorField {
  GridSpec grid;
  std::map<NodeId, std::vector<double>> w;
  std::map<NodeId, std::int64_t> support;
};

/// Average the per-shift fields onto the canonical grid: each shifted cell
/// contributes its v_R at its center point; w(Q) is the mean over every
/// shift of all contributions landing in Q. The canonical half-width is the
/// smallest multiple of h covering every shifted domain, so a lone
/// delta = 0 field is reproduced cell for cell.
inline VectorField canonical_average(const std::vector<ShiftField>& fields) {
  if (fields.empty())
    throw std::invalid_argument("canonical_average: no shifted fields");
  const int m = fields.front().grid.dim();
  const double h = fields.front().grid.h();
  double need = 0.0;
  for (const ShiftField& f : fields) {
    if (f.grid.dim() != m || std::fabs(f.grid.h() - h) > 1e-12)
      throw std::invalid_argument(
          "canonical_average: fields disagree on h or dimension");
    double dmax = 0.0;
    for (double d : f.grid.delta()) dmax = std::max(dmax, d);
    need = std::max(need, f.grid.L() + dmax);
  }
  const auto k = static_cast<std::int64_t>(std::ceil(need / h - 1e-9));
  GridSpec canon(m, h, static_cast<double>(std::max<std::int64_t>(k, 1)) * h,
                 std::vector<double>(m, 0.0));

  VectorField out{canon, {}, {}};
  for (const ShiftField& f : fields)
    for (const auto& [cell, vec] : f.v) {
      const std::vector<double> center = f.grid.cell_center(cell);
      const NodeId q = canon.locate_linear(center);
      auto [it, fresh] = out.w.try_emplace(q, std::vector<double>(m, 0.0));
      for (int l = 0; l < m; ++l) it->second[l] += vec[l];
      ++out.support[q];
    }
  for (auto& [cell, vec] : out.w) {
    const double n = static_cast<double>(out.support[cell]);
    for (double& c : vec) c /= n;
  }
  return out;
}

/// TSV quiver rows: center coordinates, vector components (cell units),
/// support count. Plot with arrows scaled by h.
inline void export_tsv(const VectorField& vf, std::ostream& out) {
  const int m = vf.grid.dim();
  out << "# ";
  for (int l = 0; l < m; ++l) out << 'q' << (l + 1) << '\t';
  for (int l = 0; l < m; ++l) out << 'w' << (l + 1) << '\t';
  out << "support\n";
  char buf[32];
  for (const auto& [cell, vec] : vf.w) {
    const std::vector<double> c = vf.grid.cell_center(cell);
    for (int l = 0; l < m; ++l) {
      std::snprintf(buf, sizeof buf, "%.17g", c[l]);
      out << buf << '\t';
    }
    for (int l = 0; l < m; ++l) {
      std::snprintf(buf, sizeof buf, "%.17g", vec[l]);
      out << buf << '\t';
    }
    out << vf.support.at(cell) << '\n';
  }
}

struct MgstdOptions {
  double shift_increment = 0.01;
  double rho = 1.1;
  std::int64_t mu_star = 1;
  ArrowDirection direction = ArrowDirection::antiflow;
  CenterWeighting weighting = CenterWeighting::source_major;
  bool use_full_order = false;
  int jobs = 1;
};

/// Everything computed at one shift, kept for inspection.
struct ShiftResult {
  std::vector<double> delta;
  GridSpec grid;
  MorseDecomposition decomposition;
  std::vector<EdgeVector> vectors;
  ShiftField field;
};

struct MgstdResult {
  VectorField field;
  std::vector<ShiftResult> shifts;
};

/// The shift lattice {0, inc, 2 inc, ...} < h on each axis.
inline std::vector<std::vector<double>> shift_lattice(int m, double h,
                                                      double inc) {
  if (!(inc > 0.0) || inc > h + 1e-12)
    throw std::invalid_argument("shift lattice: increment must be in (0, h]");
  const auto per_axis = static_cast<std::int64_t>(std::ceil(h / inc - 1e-9));
  std::vector<double> axis;
  for (std::int64_t k = 0; k < per_axis; ++k) {
    const double d = static_cast<double>(k) * inc;
    if (d < h) axis.push_back(d);
  }
  std::vector<std::vector<double>> lattice;
  std::vector<std::size_t> ptr(m, 0);
  while (true) {
    std::vector<double> delta(m);
    for (int l = 0; l < m; ++l) delta[l] = axis[ptr[l]];
    lattice.push_back(std::move(delta));
    int l = m - 1;
    while (l >= 0 && ++ptr[l] == axis.size()) ptr[l--] = 0;
    if (l < 0) break;
  }
  return lattice;
}

/// Steps 1-4 for a fixed mu_star: per-shift decomposition and arrows over
/// the whole shift lattice, then the canonical average.
inline MgstdResult run_mgstd(const Dataset& d, double h,
                             const MgstdOptions& opt) {
  const int m = d.dim();
  const double bound = data_bound(d);
  const auto lattice = shift_lattice(m, h, opt.shift_increment);

  std::vector<std::unique_ptr<ShiftResult>> shifts(lattice.size());
  const auto run_one = [&](std::size_t s) {
    GridSpec grid = fit_grid(m, h, lattice[s], bound);
    const TransitionCounts tc = count_transitions(d, grid);
    const Digraph g = build_multivalued_map(tc, opt.rho, opt.mu_star);
    MorseDecomposition md = morse_decomposition(g);
    std::vector<EdgeVector> vecs = edge_vectors(
        md, grid, opt.direction, opt.weighting, opt.use_full_order);
    ShiftField f = shift_field(vecs, grid);
    shifts[s] = std::make_unique<ShiftResult>(
        ShiftResult{lattice[s], std::move(grid), std::move(md),
                    std::move(vecs), std::move(f)});
  };

  if (opt.jobs <= 1 || lattice.size() < 2) {
    for (std::size_t s = 0; s < lattice.size(); ++s) run_one(s);
  } else {
    const std::size_t workers =
        std::min<std::size_t>(opt.jobs, lattice.size());
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          while (true) {
            const std::size_t s = next.fetch_add(1);
            if (s >= lattice.size()) break;
            run_one(s);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<ShiftField> fields;
  fields.reserve(shifts.size());
  for (const auto& s : shifts) fields.push_back(s->field);
  MgstdResult result{canonical_average(fields), {}};
  result.shifts.reserve(shifts.size());
  for (auto& s : shifts) result.shifts.push_back(std::move(*s));
  return result;
}

}  // namespace mgstd
