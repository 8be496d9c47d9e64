#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mgstd/dataset.hpp"
#include "mgstd/errors.hpp"
#include "mgstd/rng.hpp"

namespace mgstd {

/// An SDE dx = f(x) dt + sigma dB with additive isotropic noise.
struct SdeModel {
  int dim;
  std::function<void(const double* x, double* out)> drift;
  double sigma;
};

/// Double well dx = x(1 - x^2) dt + sigma dB: stable points at x = +-1,
/// unstable at 0.
inline SdeModel double_well_1d(double sigma) {
  return SdeModel{
      1, [](const double* x, double* out) { out[0] = x[0] * (1.0 - x[0] * x[0]); },
      sigma};
}

/// Planar system dx = y dt + sigma dBx, dy = (-4y + x(1 - x^2)) dt + sigma dBy:
/// sinks at (+-1, 0), saddle at the origin.
inline SdeModel saddle_2d(double sigma) {
  return SdeModel{2,
                  [](const double* x, double* out) {
                    out[0] = x[1];
                    out[1] = -4.0 * x[1] + x[0] * (1.0 - x[0] * x[0]);
                  },
                  sigma};
}

struct SimConfig {
  std::int64_t n_series = 1;
  std::int64_t steps = 1;    // recorded steps; a series has steps+1 points
  double dt_out = 0.1;       // recording interval
  double dt_int = 0.001;     // integration step; dt_out/dt_int integral
  std::vector<std::array<double, 2>> box;  // initial distribution, per axis
  std::uint64_t seed = 0;

  std::int64_t substeps() const {
    const double r = dt_out / dt_int;
    const auto k = static_cast<std::int64_t>(std::llround(r));
    if (k < 1 || std::fabs(r - static_cast<double>(k)) > 1e-9)
      throw std::invalid_argument(
          "sim config: dt_out must be a positive integer multiple of dt_int");
    return k;
  }
};

/// One step of the stochastic Runge-Kutta scheme for additive noise
/// (Heun predictor-corrector sharing a single Gaussian increment):
///   F1 = f(x),  F2 = f(x + dt F1 + sigma sqrt(dt) xi),
///   x' = x + dt/2 (F1 + F2) + sigma sqrt(dt) xi.
inline void srk2_step(const SdeModel& model, double* x, double dt,
                      const double* xi) {
  const int m = model.dim;
  if (m < 1 || m > 4) throw std::invalid_argument("srk2: dim out of range");
  double f1[4], f2[4], pred[4];
  const double noise_scale = model.sigma * std::sqrt(dt);
  model.drift(x, f1);
  for (int l = 0; l < m; ++l)
    pred[l] = x[l] + dt * f1[l] + noise_scale * xi[l];
  model.drift(pred, f2);
  for (int l = 0; l < m; ++l) {
    x[l] += 0.5 * dt * (f1[l] + f2[l]) + noise_scale * xi[l];
    if (!std::isfinite(x[l]))
      throw numeric_error("srk2: state became non-finite");
  }
}

/// Integrate n_series trajectories from uniform initial points in the box.
/// Series k consumes only substream k of the seed, so the dataset is a pure
/// function of (model, cfg) regardless of worker count or schedule.
inline Dataset simulate(const SdeModel& model, const SimConfig& cfg,
                        int jobs = 1) {
  const int m = model.dim;
  if (m < 1 || m > 4) throw std::invalid_argument("simulate: dim out of range");
  if (static_cast<int>(cfg.box.size()) != m)
    throw std::invalid_argument("simulate: box dimension mismatch");
  if (cfg.n_series < 1 || cfg.steps < 0)
    throw std::invalid_argument("simulate: bad series/step counts");
  const std::int64_t substeps = cfg.substeps();

  std::vector<std::string> ids(cfg.n_series);
  std::vector<std::size_t> lengths(cfg.n_series,
                                   static_cast<std::size_t>(cfg.steps) + 1);
  for (std::int64_t k = 0; k < cfg.n_series; ++k) ids[k] = std::to_string(k);
  Dataset out = Dataset::with_layout(m, std::move(ids), lengths);

  const auto run_range = [&](std::int64_t lo, std::int64_t hi) {
    double x[4], xi[4];
    for (std::int64_t k = lo; k < hi; ++k) {
      PhiloxStream rng(cfg.seed, static_cast<std::uint64_t>(k));
      for (int l = 0; l < m; ++l) {
        const double u = rng.uniform();
        x[l] = cfg.box[l][0] + u * (cfg.box[l][1] - cfg.box[l][0]);
      }
      out.set_point(k, 0, x);
      for (std::int64_t s = 1; s <= cfg.steps; ++s) {
        for (std::int64_t sub = 0; sub < substeps; ++sub) {
          for (int l = 0; l < m; ++l) xi[l] = rng.normal();
          try {
            srk2_step(model, x, cfg.dt_int, xi);
          } catch (const numeric_error& e) {
            throw numeric_error(std::string(e.what()) + " (series " +
                                std::to_string(k) + ", output step " +
                                std::to_string(s) + ")");
          }
        }
        out.set_point(k, s, x);
      }
    }
  };

  if (jobs <= 1 || cfg.n_series < 2) {
    run_range(0, cfg.n_series);
    return out;
  }
  const std::int64_t workers =
      std::min<std::int64_t>(jobs, cfg.n_series);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::int64_t chunk = (cfg.n_series + workers - 1) / workers;
  for (std::int64_t w = 0; w < workers; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min(cfg.n_series, lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      try {
        run_range(lo, hi);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace mgstd
