#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mgstd/dataset.hpp"
#include "mgstd/errors.hpp"
#include "mgstd/grid.hpp"
#include "mgstd/morse.hpp"
#include "mgstd/transitions.hpp"
#include "mgstd/vector_field.hpp"

namespace mgstd {

/// Result of the mu* scan: the ratio curve r(mu*) = size of largest Morse
/// set / size of second largest (+infinity when fewer than two exist), and
/// the first threshold where the ratio drops below A, if any.
struct MuStarSelection {
  std::optional<std::int64_t> mu_star;
  std::vector<std::pair<std::int64_t, double>> curve;
};

/// Scan mu* = 1..mu_max on one grid; the counts are computed once and only
/// the edge filter and decomposition rerun per threshold.
inline MuStarSelection select_mu_star_counts(const TransitionCounts& tc,
                                             double rho, double A,
                                             std::int64_t mu_max) {
  if (!(A > 1.0)) throw std::invalid_argument("select_mu_star: A must be > 1");
  if (mu_max < 1)
    throw std::invalid_argument("select_mu_star: mu_max must be >= 1");
  MuStarSelection sel;
  for (std::int64_t mu = 1; mu <= mu_max; ++mu) {
    const Digraph g = build_multivalued_map(tc, rho, mu);
    const MorseDecomposition md = morse_decomposition(g);
    double r = std::numeric_limits<double>::infinity();
    if (md.size() >= 2)
      r = static_cast<double>(md.morse_sets[0].size()) /
          static_cast<double>(md.morse_sets[1].size());
    sel.curve.emplace_back(mu, r);
    if (!sel.mu_star && r < A) sel.mu_star = mu;
  }
  return sel;
}

inline MuStarSelection select_mu_star(const Dataset& d, const GridSpec& grid,
                                      double rho, double A,
                                      std::int64_t mu_max) {
  return select_mu_star_counts(count_transitions(d, grid), rho, A, mu_max);
}

struct AveragedMuStar {
  std::int64_t mu_star = 0;  // mean rounded half-up
  double mean = 0.0;
  std::size_t n_selected = 0;  // shifts where selection succeeded
  std::size_t n_failed = 0;    // shifts excluded (no admissible mu*)
};

/// Per-shift mu* selection over the whole shift lattice; shifts where no
/// threshold is admissible are excluded from the mean. The mean is rounded
/// half-up since the threshold must be an integer.
inline AveragedMuStar select_mu_star_averaged(const Dataset& d, double h,
                                              double rho, double A,
                                              double shift_increment,
                                              std::int64_t mu_max = 100) {
  const int m = d.dim();
  const double bound = data_bound(d);
  AveragedMuStar avg;
  double sum = 0.0;
  for (const auto& delta : shift_lattice(m, h, shift_increment)) {
    const GridSpec grid = fit_grid(m, h, delta, bound);
    const MuStarSelection sel = select_mu_star(d, grid, rho, A, mu_max);
    if (sel.mu_star) {
      sum += static_cast<double>(*sel.mu_star);
      ++avg.n_selected;
    } else {
      ++avg.n_failed;
    }
  }
  if (avg.n_selected == 0)
    throw numeric_error("select_mu_star_averaged: no shift admits a mu*");
  avg.mean = sum / static_cast<double>(avg.n_selected);
  avg.mu_star = static_cast<std::int64_t>(std::floor(avg.mean + 0.5));
  return avg;
}

/// Relative portion of phase space carrying at least n data points, on the
/// unshifted grid: n -> h^m * #{cells with nu >= n}, n = 1..n_max. Counts
/// beyond n_max are treated as n_max.
inline std::vector<double> grid_coverage(const Dataset& d, double h,
                                         std::int64_t n_max = 100) {
  if (!(h > 0.0)) throw std::invalid_argument("grid_coverage: h must be > 0");
  if (n_max < 1)
    throw std::invalid_argument("grid_coverage: n_max must be >= 1");
  const int m = d.dim();
  const GridSpec grid =
      fit_grid(m, h, std::vector<double>(m, 0.0), data_bound(d));
  const TransitionCounts tc = count_transitions(d, grid);
  std::vector<std::int64_t> hist(static_cast<std::size_t>(n_max) + 1, 0);
  for (const auto& [cell, nu] : tc.nu) ++hist[std::min(nu, n_max)];
  double cellsize = 1.0;
  for (int l = 0; l < m; ++l) cellsize *= h;
  std::vector<double> curve(static_cast<std::size_t>(n_max));
  std::int64_t at_least = 0;
  for (std::int64_t n = n_max; n >= 1; --n) {
    at_least += hist[n];
    curve[n - 1] = cellsize * static_cast<double>(at_least);
  }
  return curve;
}

struct HRecommendation {
  double h = 0.0;
  std::vector<std::pair<double, std::vector<double>>> table;  // h -> curve
};

/// Pick the candidate cell size whose coverage, averaged over the band of
/// occupancies regarded as sufficient (10..20 by default), is largest.
inline HRecommendation recommend_h(const Dataset& d,
                                   const std::vector<double>& candidates,
                                   std::int64_t band_lo = 10,
                                   std::int64_t band_hi = 20) {
  if (candidates.empty())
    throw std::invalid_argument("recommend_h: no candidates");
  if (band_lo < 1 || band_hi < band_lo)
    throw std::invalid_argument("recommend_h: bad band");
  HRecommendation rec;
  double best = -1.0;
  for (double h : candidates) {
    std::vector<double> curve =
        grid_coverage(d, h, std::max<std::int64_t>(band_hi, 100));
    double score = 0.0;
    for (std::int64_t n = band_lo; n <= band_hi; ++n) score += curve[n - 1];
    score /= static_cast<double>(band_hi - band_lo + 1);
    if (score > best) {
      best = score;
      rec.h = h;
    }
    rec.table.emplace_back(h, std::move(curve));
  }
  return rec;
}

inline void export_curve_tsv(
    const std::vector<std::pair<std::int64_t, double>>& curve,
    std::ostream& out, const char* key, const char* value) {
  char buf[32];
  out << key << '\t' << value << '\n';
  for (const auto& [k, v] : curve) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << k << '\t' << buf << '\n';
  }
}

}  // namespace mgstd
