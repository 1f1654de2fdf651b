#pragma once

#include <cstdint>
#include <vector>

#include "volgs/train.hpp"

namespace volgs {

/// Synthetic benchmark: known primitives inside a unit ball seen from cameras
/// on a surrounding sphere, plus a jittered point cloud to start fitting from.
struct ToySceneOptions {
  std::size_t primitives = 30;
  int train_views = 20;
  int test_views = 5;
  int resolution = 64;
  std::size_t init_points = 100;
  /// Standard deviation of the noise added to seed positions.
  double init_jitter = 0.03;
  double camera_radius = 2.5;
  double fov_x = 0.9;
  /// Gives every primitive degree-1 and degree-2 SH colour variation.
  bool view_dependent = false;
  BasisFamily family = BasisFamily::gaussian;
  Rgb background = Rgb::Ones();
  /// Step used to render the ground-truth images.
  double truth_dt = 0.0025;
};

struct ToyScene {
  Scene truth;
  std::vector<TrainView> train;
  std::vector<TrainView> test;
  std::vector<PointSample> points;
};

ToyScene make_toy_scene(std::uint64_t seed, const ToySceneOptions& options = {});

/// Step used when fitting the toy scene. Far coarser than the renderer's
/// default, which is sized for full-resolution scenes and a GPU budget.
inline constexpr double kToyDt = 0.02;

/// Training setup for the toy scene: 2000 iterations at kToyDt, unlock every
/// 300 iterations, no densification, position rate scaled up 20x.
TrainConfig toy_train_config(std::uint64_t seed);

/// Cameras on a sphere around the origin looking at it; `count` points of a
/// Fibonacci lattice rotated by `phase`.
std::vector<Camera> orbit_cameras(int count, double radius, int resolution, double fov_x,
                                  double phase);

}  // namespace volgs
