#pragma once

#include <cstddef>
#include <random>

#include "volgs/adam.hpp"

namespace volgs {

struct DensifyOptions {
  /// Averaged |dL/dmu| above which a primitive is cloned or split.
  double grad_threshold = 5e-5;
  /// Primitives whose largest scale is at most this fraction of the scene
  /// extent are cloned, larger ones are split.
  double clone_extent_fraction = 0.01;
  double split_factor = 1.6;
  int split_children = 2;
  /// Primitives with activated density below this are removed.
  double prune_density = 0.1;
  /// Largest dimension of the box around the centres when <= 0.
  double scene_extent = 0.0;
};

struct DensifyReport {
  std::size_t cloned = 0;
  std::size_t split = 0;
  std::size_t pruned = 0;
};

/// Largest side of the axis-aligned box around all primitive centres.
double center_extent(const Scene& scene);

/// Clone / split / prune in one pass. Adam moments follow the surviving
/// primitives; new primitives start with zero moments. The scene is never
/// pruned to zero primitives (the densest one survives).
DensifyReport adaptive_control(Scene& scene, const DensificationStats& stats, AdamState& adam,
                               const DensifyOptions& options, std::mt19937_64& rng);

}  // namespace volgs
