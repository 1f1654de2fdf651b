#include "volgs/camera.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "volgs/errors.hpp"

namespace volgs {

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ParameterError("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ParameterError("image size must be positive");
  const Mat3 r = camera_to_world.linear();
  if (!r.allFinite() || !camera_to_world.translation().allFinite()) {
    throw ParameterError("camera pose is not finite");
  }
  if (!(r.transpose() * r).isApprox(Mat3::Identity(), 1e-6)) {
    throw ParameterError("camera rotation is not orthonormal");
  }
}

Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width, int height,
               double fov_x_radians) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = 0.5 * width / std::tan(0.5 * fov_x_radians);
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  const Vec3 forward = (target - eye).normalized();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  cam.camera_to_world.linear() = r;
  cam.camera_to_world.translation() = eye;
  return cam;
}

void RayBatch::append(const RayBatch& other) {
  const Eigen::Index n = origins.cols();
  origins.conservativeResize(3, n + other.origins.cols());
  directions.conservativeResize(3, n + other.directions.cols());
  origins.rightCols(other.origins.cols()) = other.origins;
  directions.rightCols(other.directions.cols()) = other.directions;
}

RayBatch generate_rays(const Camera& camera, std::span<const PixelCoord> pixels,
                       int rays_per_pixel) {
  if (rays_per_pixel != 1 && rays_per_pixel != 4) {
    throw ParameterError("rays_per_pixel must be 1 or 4");
  }
  static constexpr std::array<std::array<double, 2>, 1> kSingle = {{{0.5, 0.5}}};
  static constexpr std::array<std::array<double, 2>, 4> kQuad = {
      {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}}};
  const std::span<const std::array<double, 2>> offsets =
      rays_per_pixel == 1 ? std::span<const std::array<double, 2>>(kSingle)
                          : std::span<const std::array<double, 2>>(kQuad);

  RayBatch batch;
  const auto n = static_cast<Eigen::Index>(pixels.size() * offsets.size());
  batch.origins.resize(3, n);
  batch.directions.resize(3, n);
  const Mat3 r = camera.camera_to_world.linear();
  const Vec3 eye = camera.camera_to_world.translation();
  Eigen::Index col = 0;
  for (const PixelCoord& px : pixels) {
    if (px.x < 0 || px.y < 0 || px.x >= camera.width || px.y >= camera.height) {
      throw ParameterError("pixel outside the image");
    }
    for (const auto& off : offsets) {
      const Vec3 local((px.x + off[0] - camera.cx) / camera.fx,
                       (px.y + off[1] - camera.cy) / camera.fy, 1.0);
      batch.origins.col(col) = eye;
      batch.directions.col(col) = (r * local).normalized();
      ++col;
    }
  }
  return batch;
}

RayBatch generate_rays(const Camera& camera, int rays_per_pixel) {
  std::vector<PixelCoord> pixels;
  pixels.reserve(static_cast<std::size_t>(camera.width) * camera.height);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) pixels.push_back({x, y});
  }
  return generate_rays(camera, pixels, rays_per_pixel);
}

}  // namespace volgs
