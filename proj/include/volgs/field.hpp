#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "volgs/scene.hpp"

namespace volgs {

/// Per-primitive quantities derived from the raw parameters once per pass.
struct PreparedPrimitive {
  Vec3 mu = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 scale = Vec3::Ones();
  /// diag(1/s) R^T: maps x - mu into the frame where the basis is radial.
  Mat3 to_unit = Mat3::Identity();
  double density = 0.0;
  /// r* of the truncated support; 0 when the support is empty.
  double support_radius = 0.0;
  /// Squared radius beyond which the truncated density is certainly zero.
  double q_cutoff = 0.0;
  bool empty_support = true;
};

struct PreparedScene {
  const Scene* scene = nullptr;
  std::vector<PreparedPrimitive> primitives;

  const SceneConfig& config() const { return scene->config; }
};

PreparedPrimitive prepare_primitive(const GaussianPrimitive& prim, const SceneConfig& config);

/// Must be rebuilt whenever the scene's parameters change.
PreparedScene prepare_scene(const Scene& scene);

/// sigma_l at squared distance q with the per-sample truncation applied:
/// values below sigma_eps are exactly zero.
inline double truncated_density(const PreparedPrimitive& p, BasisFamily family, double sigma_eps,
                                 double q) {
  if (q > p.q_cutoff) return 0.0;
  const double sigma = p.density * eval_basis_sq(family, q);
  return sigma >= sigma_eps ? sigma : 0.0;
}

double squared_distance(const PreparedPrimitive& p, const Vec3& x);

/// sigma(x) summed over `contributors`.
double density_at(const Vec3& x, std::span<const std::uint32_t> contributors,
                  const PreparedScene& prepared);

/// Density-weighted mean of the contributors' radiance. (0,0,0) when the
/// total density vanishes.
Rgb radiance_at(const Vec3& x, const Vec3& d, std::span<const std::uint32_t> contributors,
                const PreparedScene& prepared);

}  // namespace volgs
