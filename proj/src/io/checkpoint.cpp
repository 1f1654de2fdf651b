#include "volgs/io/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "volgs/errors.hpp"

namespace volgs::io {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

namespace {

constexpr char kMagic[8] = {'V', 'O', 'L', 'G', 'S', 'C', 'K', 'P'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw IoError("checkpoint: truncated file " + path.string());
  }
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Scene& scene) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot write " + path.string());
  const SceneConfig& c = scene.config;
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, layout::kCount);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.basis.family));
  put<std::uint8_t>(out, c.basis.isotropic ? 1 : 0);
  put<double>(out, c.sigma_eps);
  put<std::uint32_t>(out, std::uint32_t(c.active_sh_degree));
  put<std::uint32_t>(out, std::uint32_t(c.active_sg_count));
  for (int i = 0; i < 3; ++i) put<double>(out, c.background[i]);
  put<std::uint64_t>(out, scene.size());
  for (const auto& p : scene.primitives) {
    out.write(reinterpret_cast<const char*>(p.raw.data()), sizeof(double) * layout::kCount);
  }
  if (!out) throw IoError("checkpoint: write failed for " + path.string());
}

Scene load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw IoError("checkpoint: bad magic in " + path.string());
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  if (get<std::uint32_t>(in, path) != std::uint32_t(layout::kCount)) {
    throw IoError("checkpoint: parameter layout mismatch");
  }
  Scene scene;
  SceneConfig& c = scene.config;
  const auto family = get<std::uint32_t>(in, path);
  if (family >= kAllBasisFamilies.size()) throw IoError("checkpoint: unknown basis family");
  c.basis.family = static_cast<BasisFamily>(family);
  c.basis.isotropic = get<std::uint8_t>(in, path) != 0;
  c.sigma_eps = get<double>(in, path);
  c.active_sh_degree = int(get<std::uint32_t>(in, path));
  c.active_sg_count = int(get<std::uint32_t>(in, path));
  for (int i = 0; i < 3; ++i) c.background[i] = get<double>(in, path);
  try {
    c.validate();
  } catch (const ParameterError& e) {
    throw IoError(std::string("checkpoint: invalid config: ") + e.what());
  }
  const auto count = get<std::uint64_t>(in, path);
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = std::uint64_t(in.tellg() - here);
  in.seekg(here);
  if (count > remaining / (sizeof(double) * layout::kCount)) {
    throw IoError("checkpoint: truncated parameters in " + path.string());
  }
  if (remaining != count * sizeof(double) * layout::kCount) {
    throw IoError("checkpoint: trailing bytes in " + path.string());
  }
  scene.primitives.resize(count);
  for (auto& p : scene.primitives) {
    if (!in.read(reinterpret_cast<char*>(p.raw.data()), sizeof(double) * layout::kCount)) {
      throw IoError("checkpoint: truncated parameters in " + path.string());
    }
  }
  return scene;
}

}  // namespace volgs::io
