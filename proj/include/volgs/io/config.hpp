#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "volgs/train.hpp"

namespace volgs::io {

/// Everything `volgs train` needs. Relative paths are resolved against the
/// directory of the config file.
struct RunConfig {
  std::filesystem::path dataset;
  /// Seed points; when empty, `random_points` points are drawn uniformly in
  /// a cube of half-side `random_extent` with gray colour.
  std::filesystem::path point_cloud;
  std::size_t random_points = 10000;
  double random_extent = 1.3;
  std::filesystem::path output_dir = "output";
  int downscale = 1;
  SceneConfig scene;
  InitOptions init;
  TrainConfig train;
};

/// Parses a JSON document. Unknown keys are rejected so that typos surface.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config);

}  // namespace volgs::io
