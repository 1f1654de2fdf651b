#pragma once

#include <filesystem>

#include "volgs/scene.hpp"

namespace volgs::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian binary scene snapshot:
///   8 bytes  magic "VOLGSCKP"
///   u32      version (1)
///   u32      parameters per primitive (87)
///   u32      basis family
///   u8       isotropic flag
///   f64      sigma_eps
///   u32      active SH degree
///   u32      active SG count
///   f64[3]   background
///   u64      primitive count
///   f64[]    raw parameters, primitive-major
void save_checkpoint(const std::filesystem::path& path, const Scene& scene);
Scene load_checkpoint(const std::filesystem::path& path);

}  // namespace volgs::io
