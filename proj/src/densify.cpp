#include "volgs/densify.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "volgs/errors.hpp"

namespace volgs {

double center_extent(const Scene& scene) {
  if (scene.empty()) return 0.0;
  Vec3 lo = scene.primitives.front().mu();
  Vec3 hi = lo;
  for (const auto& p : scene.primitives) {
    lo = lo.cwiseMin(p.mu());
    hi = hi.cwiseMax(p.mu());
  }
  return (hi - lo).maxCoeff();
}

DensifyReport adaptive_control(Scene& scene, const DensificationStats& stats, AdamState& adam,
                               const DensifyOptions& options, std::mt19937_64& rng) {
  const std::size_t n = scene.size();
  if (stats.size() != n || adam.size() != n) {
    throw DimensionError("adaptive_control: statistics do not match the scene");
  }
  DensifyReport report;
  const BasisConfig& basis = scene.config.basis;
  const double extent = options.scene_extent > 0.0 ? options.scene_extent : center_extent(scene);
  const Eigen::VectorXd avg = stats.average();
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<GaussianPrimitive> next;
  std::vector<std::size_t> keep;
  std::vector<GaussianPrimitive> added;
  next.reserve(n);
  keep.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const GaussianPrimitive& prim = scene.primitives[i];
    if (!(avg[Eigen::Index(i)] > options.grad_threshold)) {
      keep.push_back(i);
      next.push_back(prim);
      continue;
    }
    const Vec3 scale = effective_scale(prim, basis);
    const double s_max = scale.maxCoeff();
    if (s_max <= options.clone_extent_fraction * extent) {
      keep.push_back(i);
      next.push_back(prim);
      GaussianPrimitive copy = prim;
      const Vec3 g = stats.grad_sum.col(Eigen::Index(i));
      if (g.norm() > 0.0) copy.mu() -= 0.5 * s_max * g.normalized();
      added.push_back(copy);
      ++report.cloned;
    } else {
      const Mat3 rotation = effective_rotation(prim, basis);
      for (int c = 0; c < options.split_children; ++c) {
        GaussianPrimitive child = prim;
        const Vec3 z(normal(rng), normal(rng), normal(rng));
        child.mu() = prim.mu() + rotation * scale.cwiseProduct(z);
        child.scale_raw().array() -= std::log(options.split_factor);
        added.push_back(child);
      }
      ++report.split;
    }
  }

  // Prune over parents and children alike.
  std::vector<GaussianPrimitive> all = next;
  all.insert(all.end(), added.begin(), added.end());
  std::vector<char> alive(all.size(), 1);
  std::size_t survivors = 0;
  std::size_t densest = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].density() < options.prune_density) alive[i] = 0;
    survivors += alive[i];
    if (all[i].density() > all[densest].density()) densest = i;
  }
  if (survivors == 0 && !all.empty()) alive[densest] = 1;

  std::vector<GaussianPrimitive> result;
  std::vector<std::size_t> kept_state;
  std::size_t new_count = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!alive[i]) {
      ++report.pruned;
      continue;
    }
    result.push_back(all[i]);
    if (i < keep.size()) {
      kept_state.push_back(keep[i]);
    } else {
      ++new_count;
    }
  }
  adam.reorder(kept_state, new_count);
  scene.primitives = std::move(result);
  return report;
}

}  // namespace volgs
