#include "volgs/io/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "volgs/errors.hpp"

namespace volgs::io {

static_assert(std::endian::native == std::endian::little, "float dumps assume a little-endian host");

namespace {
constexpr char kFloatMagic[8] = {'V', 'O', 'L', 'G', 'S', 'I', 'M', 'G'};
}

Image read_png(const std::filesystem::path& path, const Rgb& background) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw IoError("png: cannot read " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGBA;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError("png: decode failed for " + path.string() + ": " + img.message);
  }
  Image out(int(img.width), int(img.height));
  for (std::size_t i = 0; i < out.num_pixels(); ++i) {
    const png_byte* p = &buf[4 * i];
    const double a = p[3] / 255.0;
    for (int c = 0; c < 3; ++c) {
      out.pixels(c, Eigen::Index(i)) = a * (p[c] / 255.0) + (1.0 - a) * background[c];
    }
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.num_pixels() == 0) throw IoError("png: refusing to write an empty image");
  std::vector<png_byte> buf(3 * image.num_pixels());
  for (std::size_t i = 0; i < image.num_pixels(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(image.pixels(c, Eigen::Index(i)), 0.0, 1.0);
      buf[3 * i + std::size_t(c)] = static_cast<png_byte>(std::lround(v * 255.0));
    }
  }
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(image.width);
  img.height = png_uint_32(image.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError("png: cannot write " + path.string() + ": " + img.message);
  }
}

void write_float_image(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("float image: cannot write " + path.string());
  out.write(kFloatMagic, sizeof kFloatMagic);
  const std::uint32_t header[3] = {std::uint32_t(image.width), std::uint32_t(image.height), 3};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  std::vector<float> values(3 * image.num_pixels());
  for (std::size_t i = 0; i < image.num_pixels(); ++i) {
    for (int c = 0; c < 3; ++c) {
      values[3 * i + std::size_t(c)] = static_cast<float>(image.pixels(c, Eigen::Index(i)));
    }
  }
  out.write(reinterpret_cast<const char*>(values.data()),
            std::streamsize(values.size() * sizeof(float)));
  if (!out) throw IoError("float image: write failed for " + path.string());
}

Image read_float_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("float image: cannot open " + path.string());
  char magic[8];
  std::uint32_t header[3];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kFloatMagic, sizeof magic) != 0) {
    throw IoError("float image: bad magic in " + path.string());
  }
  if (!in.read(reinterpret_cast<char*>(header), sizeof header) || header[2] != 3) {
    throw IoError("float image: bad header in " + path.string());
  }
  Image out(static_cast<int>(header[0]), static_cast<int>(header[1]));
  std::vector<float> values(3 * out.num_pixels());
  if (!in.read(reinterpret_cast<char*>(values.data()),
               std::streamsize(values.size() * sizeof(float)))) {
    throw IoError("float image: truncated " + path.string());
  }
  for (std::size_t i = 0; i < out.num_pixels(); ++i) {
    for (int c = 0; c < 3; ++c) out.pixels(c, Eigen::Index(i)) = values[3 * i + std::size_t(c)];
  }
  return out;
}

}  // namespace volgs::io
