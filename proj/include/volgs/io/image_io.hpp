#pragma once

#include <filesystem>

#include "volgs/image.hpp"

namespace volgs::io {

/// 8-bit PNG. RGBA files are composited over `background`.
Image read_png(const std::filesystem::path& path, const Rgb& background = Rgb::Ones());

/// Values are clamped to [0, 1] and rounded to 8 bits.
void write_png(const std::filesystem::path& path, const Image& image);

/// Raw float dump, little-endian:
///   8 bytes  magic "VOLGSIMG"
///   u32      width
///   u32      height
///   u32      channels (3)
///   f32[]    width * height * channels values, row-major, channels interleaved
void write_float_image(const std::filesystem::path& path, const Image& image);
Image read_float_image(const std::filesystem::path& path);

}  // namespace volgs::io
