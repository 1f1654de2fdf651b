#include "volgs/field.hpp"

#include "volgs/appearance.hpp"

namespace volgs {

PreparedPrimitive prepare_primitive(const GaussianPrimitive& prim, const SceneConfig& config) {
  PreparedPrimitive p;
  p.mu = prim.mu();
  p.rotation = effective_rotation(prim, config.basis);
  p.scale = effective_scale(prim, config.basis);
  p.to_unit = p.scale.cwiseInverse().asDiagonal() * p.rotation.transpose();
  p.density = prim.density();
  const auto radius = support_radius(config.basis.family, p.density, config.sigma_eps);
  if (radius && *radius > 0.0) {
    p.support_radius = *radius;
    p.empty_support = false;
    const double slack = support_kind(config.basis.family) == SupportKind::compact ? 0.0 : 1e-6;
    p.q_cutoff = (*radius) * (*radius) * (1.0 + slack);
  }
  return p;
}

PreparedScene prepare_scene(const Scene& scene) {
  PreparedScene out;
  out.scene = &scene;
  out.primitives.reserve(scene.size());
  for (const auto& prim : scene.primitives) {
    out.primitives.push_back(prepare_primitive(prim, scene.config));
  }
  return out;
}

double squared_distance(const PreparedPrimitive& p, const Vec3& x) {
  return (p.to_unit * (x - p.mu)).squaredNorm();
}

double density_at(const Vec3& x, std::span<const std::uint32_t> contributors,
                  const PreparedScene& prepared) {
  const SceneConfig& cfg = prepared.config();
  double sigma = 0.0;
  for (std::uint32_t i : contributors) {
    const PreparedPrimitive& p = prepared.primitives[i];
    sigma += truncated_density(p, cfg.basis.family, cfg.sigma_eps, squared_distance(p, x));
  }
  return sigma;
}

Rgb radiance_at(const Vec3& x, const Vec3& d, std::span<const std::uint32_t> contributors,
                const PreparedScene& prepared) {
  const SceneConfig& cfg = prepared.config();
  double sigma = 0.0;
  Rgb weighted = Rgb::Zero();
  for (std::uint32_t i : contributors) {
    const PreparedPrimitive& p = prepared.primitives[i];
    const double s = truncated_density(p, cfg.basis.family, cfg.sigma_eps, squared_distance(p, x));
    if (s == 0.0) continue;
    sigma += s;
    weighted += s * eval_radiance(prepared.scene->primitives[i], cfg, d);
  }
  if (sigma == 0.0) return Rgb::Zero();
  return weighted / sigma;
}

}  // namespace volgs
