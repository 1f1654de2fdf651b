#pragma once

#include <cstddef>

#include "volgs/types.hpp"

namespace volgs {

/// Float RGB image, one column per pixel in row-major pixel order.
struct Image {
  int width = 0;
  int height = 0;
  Eigen::Array3Xd pixels;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(Eigen::Array3Xd::Zero(3, Eigen::Index(w) * h)) {}
  Image(int w, int h, const Rgb& fill) : Image(w, h) { pixels.colwise() = fill.array(); }

  std::size_t num_pixels() const { return static_cast<std::size_t>(width) * height; }
  Eigen::Index index(int x, int y) const { return Eigen::Index(y) * width + x; }
  auto at(int x, int y) { return pixels.col(index(x, y)); }
  auto at(int x, int y) const { return pixels.col(index(x, y)); }
  bool same_shape(const Image& other) const {
    return width == other.width && height == other.height;
  }
};

/// Averages groups of `rays_per_pixel` consecutive ray colors into pixels.
Image image_from_rays(const Eigen::Matrix3Xd& ray_colors, int width, int height,
                      int rays_per_pixel);

/// Spreads a per-pixel gradient back onto the rays of each pixel.
Eigen::Matrix3Xd ray_gradients_from_image(const Image& pixel_gradient, int rays_per_pixel);

/// Box-filter downsampling by an integer factor (trailing pixels dropped).
Image downsample(const Image& image, int factor);

Image clamp01(const Image& image);

}  // namespace volgs
