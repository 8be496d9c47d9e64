#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mgstd/errors.hpp"

namespace mgstd {

/// A finite collection of finite m-dimensional time series.
///
/// Points are stored in one flat row-major array (series after series), so
/// datasets with very many short series stay compact. A Series is a named
/// window [offset, offset+length) of point rows.
class Dataset {
 public:
  struct Series {
    std::string id;
    std::size_t offset = 0;  // first point row
    std::size_t length = 0;  // number of points
  };

  explicit Dataset(int m) : m_(m) {
    if (m_ < 1) throw std::invalid_argument("dataset: dimension must be >= 1");
  }

  /// Pre-sized dataset: all series exist with fixed lengths, points are
  /// written afterwards via set_point (fill order is free, so independent
  /// workers may own disjoint series).
  static Dataset with_layout(int m, std::vector<std::string> ids,
                             const std::vector<std::size_t>& lengths) {
    if (ids.size() != lengths.size())
      throw std::invalid_argument("dataset layout: ids/lengths size mismatch");
    Dataset d(m);
    std::size_t total = 0;
    d.series_.reserve(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
      d.series_.push_back(Series{std::move(ids[k]), total, lengths[k]});
      total += lengths[k];
    }
    d.values_.assign(total * static_cast<std::size_t>(m), 0.0);
    return d;
  }

  int dim() const { return m_; }
  std::size_t n_series() const { return series_.size(); }
  const Series& series(std::size_t k) const { return series_[k]; }
  std::size_t series_length(std::size_t k) const { return series_[k].length; }
  std::size_t total_points() const {
    return values_.size() / static_cast<std::size_t>(m_);
  }

  const double* point(std::size_t k, std::size_t n) const {
    return values_.data() + (series_[k].offset + n) * m_;
  }
  std::vector<double> point_vec(std::size_t k, std::size_t n) const {
    const double* p = point(k, n);
    return std::vector<double>(p, p + m_);
  }
  const std::vector<double>& raw_values() const { return values_; }

  /// Append an empty series at the end; points go in via push_point.
  std::size_t add_series(std::string id) {
    series_.push_back(Series{std::move(id), total_points(), 0});
    return series_.size() - 1;
  }

  /// Append one point to the most recently added series.
  void push_point(const double* y) {
    if (series_.empty())
      throw std::logic_error("dataset: push_point before add_series");
    for (int l = 0; l < m_; ++l) {
      if (!std::isfinite(y[l]))
        throw data_error("dataset: non-finite coordinate in series '" +
                         series_.back().id + "'");
      values_.push_back(y[l]);
    }
    ++series_.back().length;
  }
  void push_point(std::initializer_list<double> y) {
    if (static_cast<int>(y.size()) != m_)
      throw std::invalid_argument("dataset: point has wrong dimension");
    push_point(y.begin());
  }

  /// Write point n of series k in a with_layout dataset.
  void set_point(std::size_t k, std::size_t n, const double* y) {
    double* dst = values_.data() + (series_[k].offset + n) * m_;
    for (int l = 0; l < m_; ++l) dst[l] = y[l];
  }

 private:
  int m_;
  std::vector<Series> series_;
  std::vector<double> values_;
};

/// One observed one-step transition: consecutive points of one series.
/// `from` and `to` borrow the dataset's storage (m coordinates each).
struct TransitionPair {
  const double* from;
  const double* to;
  std::size_t series;
};

/// All consecutive pairs, series by series: exactly sum(len_k - 1) entries,
/// never pairing across series boundaries.
inline std::vector<TransitionPair> transition_pairs(const Dataset& d) {
  std::vector<TransitionPair> pairs;
  std::size_t total = 0;
  for (std::size_t k = 0; k < d.n_series(); ++k)
    if (d.series_length(k) > 1) total += d.series_length(k) - 1;
  pairs.reserve(total);
  for (std::size_t k = 0; k < d.n_series(); ++k) {
    const std::size_t n = d.series_length(k);
    for (std::size_t i = 0; i + 1 < n; ++i)
      pairs.push_back(TransitionPair{d.point(k, i), d.point(k, i + 1), k});
  }
  return pairs;
}

/// Largest coordinate magnitude over all points (0 for an empty dataset).
inline double data_bound(const Dataset& d) {
  double b = 0.0;
  for (double v : d.raw_values()) b = std::max(b, std::fabs(v));
  return b;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view tok, std::size_t row) {
  double v = 0.0;
  const auto [ptr, ec] =
      std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw data_error("csv row " + std::to_string(row) +
                     ": cannot parse number '" + std::string(tok) + "'");
  if (!std::isfinite(v))
    throw data_error("csv row " + std::to_string(row) +
                     ": non-finite value '" + std::string(tok) + "'");
  return v;
}

inline long long parse_step(std::string_view tok, std::size_t row) {
  long long v = 0;
  const auto [ptr, ec] =
      std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw data_error("csv row " + std::to_string(row) +
                     ": cannot parse step '" + std::string(tok) + "'");
  return v;
}

}  // namespace detail

/// Read a dataset from CSV rows `series_id, step, y1, ..., ym`.
///
/// m is inferred from the first data row and must be constant. Rows may
/// appear in any order; within a series the steps must form a run of
/// consecutive integers with no duplicates. Lines starting with '#' and
/// blank lines are skipped. Series come out in first-appearance order.
inline Dataset ingest_csv(std::istream& in) {
  struct Row {
    long long step;
    std::size_t row_no;
    std::vector<double> y;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Row>> rows_by_series;
  int m = -1;
  std::string line;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    std::vector<std::string_view> tok;
    while (true) {
      const auto comma = sv.find(',');
      if (comma == std::string_view::npos) {
        tok.push_back(detail::trim(sv));
        break;
      }
      tok.push_back(detail::trim(sv.substr(0, comma)));
      sv.remove_prefix(comma + 1);
    }
    if (tok.size() < 3)
      throw data_error("csv row " + std::to_string(row_no) +
                       ": expected series_id, step, y1, ...");
    if (m < 0) m = static_cast<int>(tok.size()) - 2;
    if (static_cast<int>(tok.size()) - 2 != m)
      throw data_error("csv row " + std::to_string(row_no) + ": has " +
                       std::to_string(tok.size() - 2) +
                       " coordinates, expected " + std::to_string(m));
    Row r;
    r.step = detail::parse_step(tok[1], row_no);
    r.row_no = row_no;
    r.y.reserve(m);
    for (int l = 0; l < m; ++l)
      r.y.push_back(detail::parse_double(tok[2 + l], row_no));
    const std::string id(tok[0]);
    auto it = rows_by_series.find(id);
    if (it == rows_by_series.end()) {
      order.push_back(id);
      it = rows_by_series.emplace(id, std::vector<Row>{}).first;
    }
    it->second.push_back(std::move(r));
  }
  if (m < 0) throw data_error("csv: no data rows");

  Dataset d(m);
  for (const std::string& id : order) {
    auto& rows = rows_by_series[id];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.step < b.step; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].step == rows[i - 1].step)
        throw data_error("csv row " + std::to_string(rows[i].row_no) +
                         ": duplicate step " + std::to_string(rows[i].step) +
                         " in series '" + id + "'");
      if (rows[i].step != rows[i - 1].step + 1)
        throw data_error("csv: series '" + id + "' has a step gap after " +
                         std::to_string(rows[i - 1].step));
    }
    d.add_series(id);
    for (const Row& r : rows) d.push_point(r.y.data());
  }
  return d;
}

/// Write the CSV form read by ingest_csv (steps renumbered from 0).
/// %.17g round-trips doubles exactly.
inline void write_csv(const Dataset& d, std::ostream& out) {
  char buf[32];
  for (std::size_t k = 0; k < d.n_series(); ++k) {
    const auto& s = d.series(k);
    if (s.id.find(',') != std::string::npos)
      throw data_error("csv: series id '" + s.id + "' contains a comma");
    for (std::size_t n = 0; n < s.length; ++n) {
      out << s.id << ',' << n;
      const double* p = d.point(k, n);
      for (int l = 0; l < d.dim(); ++l) {
        std::snprintf(buf, sizeof buf, "%.17g", p[l]);
        out << ',' << buf;
      }
      out << '\n';
    }
  }
}

/// Per-coordinate pooled mean and population standard deviation.
inline std::pair<std::vector<double>, std::vector<double>> pooled_moments(
    const Dataset& d) {
  const int m = d.dim();
  const std::size_t n = d.total_points();
  if (n == 0) throw data_error("dataset: empty, no moments");
  const std::vector<double>& v = d.raw_values();
  std::vector<double> mean(m, 0.0), sd(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int l = 0; l < m; ++l) mean[l] += v[i * m + l];
  for (int l = 0; l < m; ++l) mean[l] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int l = 0; l < m; ++l) {
      const double c = v[i * m + l] - mean[l];
      sd[l] += c * c;
    }
  for (int l = 0; l < m; ++l) sd[l] = std::sqrt(sd[l] / static_cast<double>(n));
  return {std::move(mean), std::move(sd)};
}

/// Shift/scale every coordinate to pooled zero mean and unit standard
/// deviation (population convention, statistics pooled over all series).
inline Dataset standardize(const Dataset& d) {
  const auto [mean, sd] = pooled_moments(d);
  for (int l = 0; l < d.dim(); ++l)
    if (!(sd[l] > 0.0))
      throw numeric_error("standardize: coordinate " + std::to_string(l + 1) +
                          " has zero variance");
  std::vector<std::string> ids;
  std::vector<std::size_t> lengths;
  for (std::size_t k = 0; k < d.n_series(); ++k) {
    ids.push_back(d.series(k).id);
    lengths.push_back(d.series_length(k));
  }
  Dataset out = Dataset::with_layout(d.dim(), std::move(ids), lengths);
  std::vector<double> y(d.dim());
  for (std::size_t k = 0; k < d.n_series(); ++k)
    for (std::size_t n = 0; n < d.series_length(k); ++n) {
      const double* p = d.point(k, n);
      for (int l = 0; l < d.dim(); ++l) y[l] = (p[l] - mean[l]) / sd[l];
      out.set_point(k, n, y.data());
    }
  return out;
}

namespace detail {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major n*n).
/// Returns eigenvalues (descending) and matching unit eigenvectors as rows.
inline void jacobi_eigen(std::vector<double> a, int n,
                         std::vector<double>& eigval,
                         std::vector<double>& eigvec_rows) {
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    double diag = 0.0;
    for (int p = 0; p < n; ++p) diag += a[p * n + p] * a[p * n + p];
    if (off <= 1e-30 * std::max(diag, 1e-300)) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < n; ++i) {
          const double aip = a[i * n + p], aiq = a[i * n + q];
          a[i * n + p] = c * aip - s * aiq;
          a[i * n + q] = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = a[p * n + i], aqi = a[q * n + i];
          a[p * n + i] = c * api - s * aqi;
          a[q * n + i] = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v[i * n + p], viq = v[i * n + q];
          v[i * n + p] = c * vip - s * viq;
          v[i * n + q] = s * vip + c * viq;
        }
      }
  }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
    return a[i * n + i] > a[j * n + j];
  });
  eigval.assign(n, 0.0);
  eigvec_rows.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < n; ++r) {
    eigval[r] = a[idx[r] * n + idx[r]];
    for (int i = 0; i < n; ++i) eigvec_rows[r * n + i] = v[i * n + idx[r]];
  }
}

}  // namespace detail

/// Project onto the top-m principal components of the pooled covariance and
/// standardize the scores. Eigenvector signs are fixed so each component's
/// largest-magnitude loading is positive.
inline Dataset pca_project(const Dataset& raw, int m) {
  const int dim = raw.dim();
  if (m < 1 || m > dim)
    throw std::invalid_argument("pca: target dimension out of range");
  const std::size_t n = raw.total_points();
  if (n < 2) throw numeric_error("pca: need at least 2 points");
  const std::vector<double>& v = raw.raw_values();
  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int l = 0; l < dim; ++l) mean[l] += v[i * dim + l];
  for (int l = 0; l < dim; ++l) mean[l] /= static_cast<double>(n);
  std::vector<double> cov(static_cast<std::size_t>(dim) * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int p = 0; p < dim; ++p) {
      const double cp = v[i * dim + p] - mean[p];
      for (int q = p; q < dim; ++q)
        cov[p * dim + q] += cp * (v[i * dim + q] - mean[q]);
    }
  for (int p = 0; p < dim; ++p)
    for (int q = p; q < dim; ++q) {
      cov[p * dim + q] /= static_cast<double>(n);
      cov[q * dim + p] = cov[p * dim + q];
    }
  std::vector<double> eigval, vec;
  detail::jacobi_eigen(cov, dim, eigval, vec);
  const double top = eigval.empty() ? 0.0 : eigval[0];
  for (int r = 0; r < m; ++r)
    if (!(eigval[r] > 0.0) || eigval[r] < 1e-10 * top)
      throw numeric_error("pca: covariance rank < " + std::to_string(m));
  for (int r = 0; r < m; ++r) {
    int arg = 0;
    for (int i = 1; i < dim; ++i)
      if (std::fabs(vec[r * dim + i]) > std::fabs(vec[r * dim + arg])) arg = i;
    if (vec[r * dim + arg] < 0.0)
      for (int i = 0; i < dim; ++i) vec[r * dim + i] = -vec[r * dim + i];
  }
  std::vector<std::string> ids;
  std::vector<std::size_t> lengths;
  for (std::size_t k = 0; k < raw.n_series(); ++k) {
    ids.push_back(raw.series(k).id);
    lengths.push_back(raw.series_length(k));
  }
  Dataset out = Dataset::with_layout(m, std::move(ids), lengths);
  std::vector<double> z(m);
  for (std::size_t k = 0; k < raw.n_series(); ++k)
    for (std::size_t i = 0; i < raw.series_length(k); ++i) {
      const double* p = raw.point(k, i);
      for (int r = 0; r < m; ++r) {
        double acc = 0.0;
        for (int q = 0; q < dim; ++q)
          acc += vec[r * dim + q] * (p[q] - mean[q]);
        z[r] = acc;
      }
      out.set_point(k, i, z.data());
    }
  return standardize(out);
}

/// Split each series into `s` interleaved series: offset c takes points
/// c, c+s, c+2s, ... Output ids are `id:c`; total point count is preserved.
inline Dataset reindex_interleave(const Dataset& d, std::size_t s) {
  if (s < 1) throw std::invalid_argument("interleave: stride must be >= 1");
  if (s == 1) return d;
  std::vector<std::string> ids;
  std::vector<std::size_t> lengths;
  for (std::size_t k = 0; k < d.n_series(); ++k) {
    const std::size_t n = d.series_length(k);
    if (n < s)
      throw data_error("interleave: series '" + d.series(k).id +
                       "' is shorter than the stride");
    for (std::size_t c = 0; c < s; ++c) {
      ids.push_back(d.series(k).id + ":" + std::to_string(c));
      lengths.push_back((n - c + s - 1) / s);
    }
  }
  Dataset out = Dataset::with_layout(d.dim(), std::move(ids), lengths);
  std::size_t outk = 0;
  for (std::size_t k = 0; k < d.n_series(); ++k) {
    const std::size_t n = d.series_length(k);
    for (std::size_t c = 0; c < s; ++c, ++outk) {
      std::size_t row = 0;
      for (std::size_t i = c; i < n; i += s, ++row)
        out.set_point(outk, row, d.point(k, i));
    }
  }
  return out;
}

}  // namespace mgstd
