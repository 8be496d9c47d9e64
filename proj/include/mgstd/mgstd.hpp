#pragma once

// Umbrella header: Morse graphs and transition vector fields from noisy
// time-series data, with grid/threshold selection heuristics and SDE
// benchmark generators.

#include "mgstd/dataset.hpp"
#include "mgstd/errors.hpp"
#include "mgstd/grid.hpp"
#include "mgstd/morse.hpp"
#include "mgstd/presets.hpp"
#include "mgstd/rng.hpp"
#include "mgstd/sde.hpp"
#include "mgstd/selection.hpp"
#include "mgstd/transitions.hpp"
#include "mgstd/vector_field.hpp"
