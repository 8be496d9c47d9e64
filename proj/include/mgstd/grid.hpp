#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgstd/errors.hpp"

namespace mgstd {

/// Per-axis integer coordinates of one grid element.
struct CellIndex {
  std::vector<std::int64_t> c;

  friend bool operator==(const CellIndex& a, const CellIndex& b) {
    return a.c == b.c;
  }
  friend bool operator!=(const CellIndex& a, const CellIndex& b) {
    return !(a == b);
  }
  friend bool operator<(const CellIndex& a, const CellIndex& b) {
    return a.c < b.c;
  }
};

/// Shifted cubical grid decomposition of the box
/// Omega = prod_l [-L + delta_l, L + delta_l], cell size h.
///
/// L is a positive integer multiple of h, so each axis carries exactly
/// 2L/h cells. Cells are half-open [a, a+h) per axis; the upper domain
/// face is closed (points exactly on it belong to the last cell).
class GridSpec {
 public:
  GridSpec(int m, double h, double L, std::vector<double> delta)
      : m_(m), h_(h), L_(L), delta_(std::move(delta)) {
    if (m_ < 1) throw std::invalid_argument("grid: dimension must be >= 1");
    if (!(h_ > 0.0)) throw std::invalid_argument("grid: cell size must be > 0");
    if (static_cast<int>(delta_.size()) != m_)
      throw std::invalid_argument("grid: shift vector length != dimension");
    for (double d : delta_)
      if (!(d >= 0.0) || !(d < h_))
        throw std::invalid_argument("grid: shifts must lie in [0, h)");
    const double ratio = L_ / h_;
    const auto k = static_cast<std::int64_t>(std::llround(ratio));
    if (k < 1 || std::fabs(ratio - static_cast<double>(k)) > 1e-9)
      throw std::invalid_argument(
          "grid: half-width must be a positive integer multiple of h");
    cells_ = 2 * k;
  }

  int dim() const { return m_; }
  double h() const { return h_; }
  double L() const { return L_; }
  const std::vector<double>& delta() const { return delta_; }

  /// Number of cells along each axis (2L/h).
  std::int64_t cells_per_axis() const { return cells_; }

  /// Total cell count (cells_per_axis ^ dim).
  std::int64_t cell_count() const {
    std::int64_t n = 1;
    for (int l = 0; l < m_; ++l) n *= cells_;
    return n;
  }

  /// Lower corner of the domain on axis l: -L + delta_l.
  double axis_origin(int l) const { return -L_ + delta_[l]; }

  /// Row-major linearization (axis 0 most significant); the digraph node id.
  std::int64_t linear(const CellIndex& ci) const {
    std::int64_t id = 0;
    for (int l = 0; l < m_; ++l) id = id * cells_ + ci.c[l];
    return id;
  }

  CellIndex coords(std::int64_t id) const {
    CellIndex ci;
    ci.c.assign(m_, 0);
    for (int l = m_ - 1; l >= 0; --l) {
      ci.c[l] = id % cells_;
      id /= cells_;
    }
    return ci;
  }

  /// Cell containing a point. Points within 1e-12*h of a cell boundary are
  /// treated as exactly on it, then assigned by the half-open convention;
  /// this keeps locate bit-stable on serialized/re-read data.
  CellIndex locate(const double* p) const {
    CellIndex ci;
    ci.c.assign(m_, 0);
    for (int l = 0; l < m_; ++l) ci.c[l] = locate_axis(p[l], l);
    return ci;
  }
  CellIndex locate(const std::vector<double>& p) const {
    return locate(p.data());
  }

  std::int64_t locate_linear(const double* p) const {
    std::int64_t id = 0;
    for (int l = 0; l < m_; ++l) id = id * cells_ + locate_axis(p[l], l);
    return id;
  }
  std::int64_t locate_linear(const std::vector<double>& p) const {
    return locate_linear(p.data());
  }

  /// Center of a cell: corner + h/2 on each axis.
  std::vector<double> cell_center(const CellIndex& ci) const {
    std::vector<double> p(m_);
    for (int l = 0; l < m_; ++l)
      p[l] = axis_origin(l) + (static_cast<double>(ci.c[l]) + 0.5) * h_;
    return p;
  }
  std::vector<double> cell_center(std::int64_t id) const {
    return cell_center(coords(id));
  }

 private:
  std::int64_t locate_axis(double x, int l) const {
    const double r = (x - axis_origin(l)) / h_;
    const double n = static_cast<double>(cells_);
    if (r < -1e-12 || r > n + 1e-12)
      throw out_of_domain_error("locate: coordinate " + std::to_string(x) +
                                " on axis " + std::to_string(l + 1) +
                                " is outside the grid domain");
    double f = std::floor(r);
    if (r - f >= 1.0 - 1e-12) f += 1.0;  // snap to boundary, half-open rule
    auto c = static_cast<std::int64_t>(f);
    if (c >= cells_) c = cells_ - 1;  // closed upper domain face
    if (c < 0) c = 0;
    return c;
  }

  int m_;
  double h_;
  double L_;
  std::vector<double> delta_;
  std::int64_t cells_;
};

/// Smallest grid around data of magnitude data_bound: L is the least
/// positive integer multiple of h with [-data_bound, data_bound]^m inside
/// Omega = prod [-L + delta_l, L + delta_l].
inline GridSpec fit_grid(int m, double h, std::vector<double> delta,
                         double data_bound) {
  if (!(h > 0.0)) throw std::invalid_argument("fit_grid: cell size must be > 0");
  if (static_cast<int>(delta.size()) != m)
    throw std::invalid_argument("fit_grid: shift vector length != dimension");
  for (double d : delta)
    if (!(d >= 0.0) || !(d < h))
      throw std::invalid_argument("fit_grid: shifts must lie in [0, h)");

  // Containment needs -L + delta_l <= -data_bound on every axis, i.e.
  // L >= data_bound + max delta. Guard the division against cases like
  // 3.0/0.3 landing just above an integer.
  double need = data_bound;
  for (double d : delta) need = std::max(need, data_bound + d);
  std::int64_t k = static_cast<std::int64_t>(std::ceil(need / h - 1e-9));
  if (k < 1) k = 1;
  return GridSpec(m, h, static_cast<double>(k) * h, std::move(delta));
}

/// fit_grid with a sanity cap: the data must fit inside [-L_tilde, L_tilde]^m
/// and the computed half-width may not exceed the cap.
inline GridSpec build_grid(int m, double h, double L_tilde,
                           std::vector<double> delta, double data_bound) {
  if (!(data_bound < L_tilde))
    throw std::invalid_argument(
        "build_grid: data bound must be smaller than the enclosing half-width");
  GridSpec g = fit_grid(m, h, std::move(delta), data_bound);
  if (!(g.L() < L_tilde + 1e-12))
    throw std::invalid_argument("build_grid: required half-width " +
                                std::to_string(g.L()) + " exceeds the cap " +
                                std::to_string(L_tilde));
  return g;
}

/// Arithmetic mean of the center points of a set of cells.
template <typename CellRange>
std::vector<double> barycenter(const CellRange& cells, const GridSpec& grid) {
  std::vector<double> mean(grid.dim(), 0.0);
  std::int64_t n = 0;
  for (const auto& cell : cells) {
    const std::vector<double> c = grid.cell_center(cell);
    for (int l = 0; l < grid.dim(); ++l) mean[l] += c[l];
    ++n;
  }
  if (n == 0) throw std::invalid_argument("barycenter: empty cell set");
  for (double& v : mean) v /= static_cast<double>(n);
  return mean;
}

}  // namespace mgstd
