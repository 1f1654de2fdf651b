#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "volgs/train.hpp"

namespace volgs {

struct ImageMetrics {
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::vector<ImageMetrics> images;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double seconds = 0.0;
  double rays_per_second = 0.0;
  double slabs_per_ray = 0.0;
  RenderStats stats;

  std::string to_json() const;
};

/// Renders every view, compares against its image and optionally writes
/// `<dir>/view_<i>.png` and `.rgbf` float dumps.
EvalReport evaluate(const Scene& scene, std::span<const TrainView> views,
                    const RenderConfig& config, const std::filesystem::path& dump_dir = {},
                    int bvh_leaf_size = 4);

}  // namespace volgs
