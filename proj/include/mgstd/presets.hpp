#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "mgstd/dataset.hpp"
#include "mgstd/sde.hpp"

namespace mgstd {

/// Benchmark experiment configurations, named after the datasets they
/// produce: D1 is the dense single-step ensemble (a million short pairs),
/// D2 the sparse long-trajectory set (30 runs, re-indexed by interleaving
/// so the effective sampling interval matches D1's 0.1).

struct PresetSpec {
  SdeModel model;
  SimConfig config;
  std::size_t interleave = 1;  // applied after simulation
};

inline PresetSpec preset(const std::string& model_name,
                         const std::string& dataset_name, std::uint64_t seed,
                         std::int64_t n_series_override = 0) {
  PresetSpec p{SdeModel{}, SimConfig{}, 1};
  if (model_name == "dw1d") {
    p.model = double_well_1d(std::sqrt(0.2));
  } else if (model_name == "saddle2d") {
    p.model = saddle_2d(std::sqrt(0.08));
  } else {
    throw std::invalid_argument("unknown model '" + model_name +
                                "' (expected dw1d or saddle2d)");
  }
  p.config.box.assign(p.model.dim, {-2.0, 2.0});
  p.config.dt_int = 0.001;
  p.config.seed = seed;
  if (dataset_name == "D1") {
    p.config.n_series = 1000000;
    p.config.steps = 1;
    p.config.dt_out = 0.1;
  } else if (dataset_name == "D2") {
    p.config.n_series = 30;
    p.config.steps = 399;
    p.config.dt_out = 0.025;
    p.interleave = 4;  // analysis interval 0.1 = 4 x 0.025
  } else {
    throw std::invalid_argument("unknown preset '" + dataset_name +
                                "' (expected D1 or D2)");
  }
  if (n_series_override > 0) p.config.n_series = n_series_override;
  return p;
}

inline Dataset make_preset_dataset(const std::string& model_name,
                                   const std::string& dataset_name,
                                   std::uint64_t seed,
                                   std::int64_t n_series_override = 0,
                                   int jobs = 1) {
  const PresetSpec p = preset(model_name, dataset_name, seed, n_series_override);
  Dataset d = simulate(p.model, p.config, jobs);
  if (p.interleave > 1) d = reindex_interleave(d, p.interleave);
  return d;
}

}  // namespace mgstd
