#pragma once

#include <filesystem>
#include <vector>

#include "volgs/scene.hpp"

namespace volgs::io {

/// ASCII or binary little-endian PLY with x, y, z and optional red, green,
/// blue (uchar scaled by 1/255, or float). Missing colours are 0.5 gray.
std::vector<PointSample> load_point_cloud(const std::filesystem::path& path);

/// Writes x, y, z, red, green, blue (uchar) vertices.
void save_point_cloud(const std::filesystem::path& path, const std::vector<PointSample>& points,
                      bool binary = true);

}  // namespace volgs::io
