#pragma once

#include <cstddef>
#include <span>

#include "volgs/types.hpp"

namespace volgs {

/// Pinhole camera. Camera frame: +x right, +y down, +z forward.
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Eigen::Isometry3d camera_to_world = Eigen::Isometry3d::Identity();

  Vec3 position() const { return camera_to_world.translation(); }
  Vec3 forward() const { return camera_to_world.linear().col(2); }
  /// Throws ParameterError on non-positive focal lengths, empty images or a
  /// non-orthonormal rotation.
  void validate() const;
};

/// Camera at `eye` looking at `target`, with `up` roughly opposite to +y.
Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width, int height,
               double fov_x_radians);

struct PixelCoord {
  int x = 0;
  int y = 0;
};

/// Independent rays; they may originate from different cameras.
struct RayBatch {
  Eigen::Matrix3Xd origins;
  Eigen::Matrix3Xd directions;

  std::size_t size() const { return static_cast<std::size_t>(origins.cols()); }
  void append(const RayBatch& other);
};

/// One ray through each pixel centre, or four through the centres of the
/// pixel's 2x2 sub-quadrants. Rays of one pixel are contiguous.
RayBatch generate_rays(const Camera& camera, std::span<const PixelCoord> pixels,
                       int rays_per_pixel = 1);

/// All pixels in row-major order.
RayBatch generate_rays(const Camera& camera, int rays_per_pixel = 1);

}  // namespace volgs
