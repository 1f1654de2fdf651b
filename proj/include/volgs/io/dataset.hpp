#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "volgs/camera.hpp"
#include "volgs/image.hpp"

namespace volgs::io {

enum class Split { train, test };

struct DatasetView {
  Camera camera;
  std::filesystem::path image_path;
  Split split = Split::train;
  Image image;
};

struct Dataset {
  std::vector<DatasetView> views;

  std::vector<const DatasetView*> split(Split which) const;
};

struct DatasetOptions {
  /// Colour that transparent pixels are composited onto.
  Rgb background = Rgb::Ones();
  /// Integer image downscaling factor (intrinsics follow).
  int downscale = 1;
};

/// Converts a Blender / OpenGL camera-to-world matrix (-z forward, +y up)
/// into the renderer's convention (+z forward, +y down).
Camera blender_camera(const Eigen::Matrix4d& transform, int width, int height,
                      double camera_angle_x);

/// Inverse of blender_camera for the extrinsics.
Eigen::Matrix4d blender_transform(const Camera& camera);

/// Reads transforms_train.json (required) and transforms_test.json (optional)
/// under `root` together with the referenced PNGs.
Dataset load_blender_dataset(const std::filesystem::path& root, const DatasetOptions& options = {});

/// Writes manifests and PNGs in the same layout. All views must share one
/// image size and horizontal field of view, with cx, cy at the image centre.
void save_blender_dataset(const std::filesystem::path& root, const Dataset& dataset);

/// Single camera: either {"width", "height", "fx", "fy", "cx", "cy",
/// "camera_to_world"} in the renderer's convention, or a Blender-style
/// {"width", "height", "camera_angle_x", "transform_matrix"}. Matrices are
/// 4x4 row-major nested arrays.
Camera load_camera_json(const std::filesystem::path& path);
void save_camera_json(const std::filesystem::path& path, const Camera& camera);

}  // namespace volgs::io
