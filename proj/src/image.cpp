#include "volgs/image.hpp"

#include "volgs/errors.hpp"

namespace volgs {

Image image_from_rays(const Eigen::Matrix3Xd& ray_colors, int width, int height,
                      int rays_per_pixel) {
  Image img(width, height);
  if (ray_colors.cols() != Eigen::Index(img.num_pixels()) * rays_per_pixel) {
    throw DimensionError("ray count does not match image size");
  }
  for (Eigen::Index p = 0; p < img.pixels.cols(); ++p) {
    img.pixels.col(p) =
        ray_colors.middleCols(p * rays_per_pixel, rays_per_pixel).rowwise().mean().array();
  }
  return img;
}

Eigen::Matrix3Xd ray_gradients_from_image(const Image& pixel_gradient, int rays_per_pixel) {
  Eigen::Matrix3Xd out(3, pixel_gradient.pixels.cols() * rays_per_pixel);
  for (Eigen::Index p = 0; p < pixel_gradient.pixels.cols(); ++p) {
    for (int r = 0; r < rays_per_pixel; ++r) {
      out.col(p * rays_per_pixel + r) = pixel_gradient.pixels.col(p).matrix() / rays_per_pixel;
    }
  }
  return out;
}

Image downsample(const Image& image, int factor) {
  if (factor < 1) throw ParameterError("downsample factor must be >= 1");
  if (factor == 1) return image;
  Image out(image.width / factor, image.height / factor);
  const double norm = 1.0 / (factor * factor);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      Eigen::Array3d sum = Eigen::Array3d::Zero();
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) sum += image.at(x * factor + dx, y * factor + dy);
      }
      out.at(x, y) = sum * norm;
    }
  }
  return out;
}

Image clamp01(const Image& image) {
  Image out = image;
  out.pixels = out.pixels.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

}  // namespace volgs
