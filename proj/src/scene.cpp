#include "volgs/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "volgs/appearance.hpp"
#include "volgs/errors.hpp"
#include "volgs/geometry.hpp"

namespace volgs {

ParamGroup param_group_of(int offset) {
  using namespace layout;
  if (offset < kQuat) return ParamGroup::position;
  if (offset < kScale) return ParamGroup::rotation;
  if (offset < kDensity) return ParamGroup::scale;
  if (offset < kSh) return ParamGroup::density;
  if (offset < kSh + 3) return ParamGroup::sh_dc;
  if (offset < kSgAmplitude) return ParamGroup::sh_rest;
  if (offset < kSgSharpness) return ParamGroup::sg_amplitude;
  if (offset < kSgAxis) return ParamGroup::sg_sharpness;
  return ParamGroup::sg_axis;
}

const char* to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::position:
      return "position";
    case ParamGroup::rotation:
      return "rotation";
    case ParamGroup::scale:
      return "scale";
    case ParamGroup::density:
      return "density";
    case ParamGroup::sh_dc:
      return "sh_dc";
    case ParamGroup::sh_rest:
      return "sh_rest";
    case ParamGroup::sg_amplitude:
      return "sg_amplitude";
    case ParamGroup::sg_sharpness:
      return "sg_sharpness";
    case ParamGroup::sg_axis:
      return "sg_axis";
  }
  return "unknown";
}

void SceneConfig::validate() const {
  if (!(sigma_eps > 0.0) || !std::isfinite(sigma_eps)) {
    throw ParameterError("sigma_eps must be a positive finite value");
  }
  if (active_sh_degree < 0 || active_sh_degree > kMaxShDegree) {
    throw ParameterError("active_sh_degree must lie in [0, 2]");
  }
  if (active_sg_count < 0 || active_sg_count > kMaxSgCount) {
    throw ParameterError("active_sg_count must lie in [0, 7]");
  }
  if (!background.allFinite() || (background.array() < 0.0).any() ||
      (background.array() > 1.0).any()) {
    throw ParameterError("background must lie in [0, 1]");
  }
}

Vec3 effective_scale(const GaussianPrimitive& prim, const BasisConfig& basis) {
  if (basis.isotropic) return Vec3::Constant(std::exp(prim.scale_raw()[0]));
  return prim.scale();
}

Mat3 effective_rotation(const GaussianPrimitive& prim, const BasisConfig& basis) {
  if (basis.isotropic) return Mat3::Identity();
  return rotation_from_quaternion<double>(prim.quat());
}

double mahalanobis(const Vec3& x, const GaussianPrimitive& prim, const BasisConfig& basis) {
  return mahalanobis<double>(x, prim.mu(), effective_rotation(prim, basis),
                             effective_scale(prim, basis));
}

namespace {

// Seven spread-out default lobe directions; amplitudes start at zero so the
// choice only matters once the lobes are unlocked.
const std::array<Vec3, kMaxSgCount> kDefaultLobeAxes = {
    Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0),
    Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(1, 1, 1).normalized()};

// Mean distance from every point to its three nearest neighbours (self excluded
// by index), using a uniform hash grid.
std::vector<double> mean_knn3_distance(std::span<const PointSample> points) {
  const std::size_t n = points.size();
  Vec3 lo = points[0].position, hi = points[0].position;
  for (const auto& p : points) {
    lo = lo.cwiseMin(p.position);
    hi = hi.cwiseMax(p.position);
  }
  const Vec3 extent = (hi - lo).cwiseMax(1e-12);
  // Roughly two points per cell.
  double cell = std::cbrt(extent.prod() * 2.0 / static_cast<double>(n));
  cell = std::max({cell, extent.maxCoeff() / 1024.0, 1e-12});

  using Key = std::array<long long, 3>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(k[0] * 73856093LL ^ k[1] * 19349663LL ^ k[2] * 83492791LL);
    }
  };
  auto key_of = [&](const Vec3& x) {
    const Vec3 c = ((x - lo) / cell).array().floor();
    return Key{static_cast<long long>(c[0]), static_cast<long long>(c[1]),
               static_cast<long long>(c[2])};
  };
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> grid;
  for (std::size_t i = 0; i < n; ++i) grid[key_of(points[i].position)].push_back(i);

  std::vector<double> result(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& x = points[i].position;
    const Key k = key_of(x);
    std::array<double, 3> best;
    best.fill(std::numeric_limits<double>::infinity());
    for (long long ring = 0;; ++ring) {
      if (ring > 16) {
        // Isolated point: a linear scan is cheaper than growing the shell.
        best.fill(std::numeric_limits<double>::infinity());
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double dist = (points[j].position - x).norm();
          if (dist < best[2]) {
            best[2] = dist;
            std::sort(best.begin(), best.end());
          }
        }
        break;
      }
      for (long long dx = -ring; dx <= ring; ++dx) {
        for (long long dy = -ring; dy <= ring; ++dy) {
          for (long long dz = -ring; dz <= ring; ++dz) {
            if (std::max({std::llabs(dx), std::llabs(dy), std::llabs(dz)}) != ring) continue;
            const auto it = grid.find(Key{k[0] + dx, k[1] + dy, k[2] + dz});
            if (it == grid.end()) continue;
            for (std::size_t j : it->second) {
              if (j == i) continue;
              const double dist = (points[j].position - x).norm();
              if (dist < best[2]) {
                best[2] = dist;
                std::sort(best.begin(), best.end());
              }
            }
          }
        }
      }
      // Every unvisited cell is at least ring * cell away.
      if (best[2] <= static_cast<double>(ring) * cell) break;
    }
    result[i] = (best[0] + best[1] + best[2]) / 3.0;
  }
  return result;
}

}  // namespace

Scene init_from_point_cloud(std::span<const PointSample> points, const SceneConfig& config,
                            const InitOptions& options) {
  config.validate();
  if (points.size() < 4) {
    throw InitializationError("point cloud needs at least 4 points, got " +
                              std::to_string(points.size()));
  }
  if (!(options.initial_density > 0.0)) {
    throw InitializationError("initial density must be positive");
  }
  for (const auto& p : points) {
    if (!p.position.allFinite() || !p.color.allFinite()) {
      throw InitializationError("point cloud contains non-finite values");
    }
  }

  const std::vector<double> knn = mean_knn3_distance(points);
  const double y00 = sh_basis<double>(Vec3::UnitZ())[0];
  const double density_raw = softplus_inverse(options.initial_density);

  Scene scene;
  scene.config = config;
  scene.primitives.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    GaussianPrimitive& prim = scene.primitives[i];
    prim.mu() = points[i].position;
    prim.quat() = Vec4(1, 0, 0, 0);
    prim.scale_raw().setConstant(std::log(std::max(knn[i], 1e-12)));
    prim.density_raw() = density_raw;
    prim.sh(0) = points[i].color / y00;
    for (int j = 0; j < kMaxSgCount; ++j) prim.sg_axis_raw(j) = kDefaultLobeAxes[j];
  }
  return scene;
}

void check_finite(const Scene& scene) {
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const ParamVector& raw = scene.primitives[i].raw;
    for (int k = 0; k < layout::kCount; ++k) {
      if (!std::isfinite(raw[k])) {
        throw ParameterError("primitive " + std::to_string(i) + " has a non-finite " +
                             to_string(param_group_of(k)) + " parameter");
      }
    }
  }
}

}  // namespace volgs
