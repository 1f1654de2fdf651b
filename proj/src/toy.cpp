#include "volgs/toy.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "volgs/appearance.hpp"

namespace volgs {

std::vector<Camera> orbit_cameras(int count, double radius, int resolution, double fov_x,
                                  double phase) {
  std::vector<Camera> cams;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    // Keep away from the poles so a world-z up vector stays usable.
    const double z = 0.8 * (1.0 - 2.0 * (i + 0.5) / count);
    const double r = std::sqrt(1.0 - z * z);
    const double a = golden * i + phase;
    const Vec3 eye = radius * Vec3(r * std::cos(a), r * std::sin(a), z);
    cams.push_back(look_at(eye, Vec3::Zero(), Vec3::UnitZ(), resolution, resolution, fov_x));
  }
  return cams;
}

TrainConfig toy_train_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.iterations = 2000;
  cfg.seed = seed;
  cfg.eval_interval = 500;
  cfg.render.dt = kToyDt;
  cfg.unlock.interval = 300;
  cfg.densify.enabled = false;
  cfg.rates.position_scale = 20.0;
  return cfg;
}

ToyScene make_toy_scene(std::uint64_t seed, const ToySceneOptions& o) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  ToyScene toy;
  SceneConfig& cfg = toy.truth.config;
  cfg.basis.family = o.family;
  cfg.background = o.background;
  cfg.active_sh_degree = o.view_dependent ? kMaxShDegree : 0;
  cfg.active_sg_count = 0;

  for (std::size_t i = 0; i < o.primitives; ++i) {
    GaussianPrimitive p;
    Vec3 dir(normal(rng), normal(rng), normal(rng));
    dir.normalize();
    p.mu() = 0.65 * std::cbrt(uni(rng)) * dir;
    Eigen::Vector4d q(normal(rng), normal(rng), normal(rng), normal(rng));
    p.quat() = q.normalized();
    for (int a = 0; a < 3; ++a) p.scale_raw()[a] = std::log(0.07 + 0.11 * uni(rng));
    p.density_raw() = softplus_inverse(8.0 + 22.0 * uni(rng));
    const Rgb base(0.1 + 0.8 * uni(rng), 0.1 + 0.8 * uni(rng), 0.1 + 0.8 * uni(rng));
    p.sh(0) = base / sh_basis<double>(Vec3::UnitZ())[0];
    if (o.view_dependent) {
      for (int k = 1; k < kNumShCoeffs; ++k) {
        for (int c = 0; c < 3; ++c) p.sh(k)[c] = (k < 4 ? 0.25 : 0.12) * (2.0 * uni(rng) - 1.0);
      }
    }
    toy.truth.primitives.push_back(p);
  }

  RenderConfig rc;
  rc.dt = o.truth_dt;
  rc.t_eps = 0.0;
  rc.hit_capacity = 1024;
  const EllipsoidBvh bvh = build_bvh(toy.truth);
  for (const Camera& cam : orbit_cameras(o.train_views, o.camera_radius, o.resolution, o.fov_x, 0.0)) {
    toy.train.push_back({cam, render_image(cam, toy.truth, bvh, rc)});
  }
  for (const Camera& cam : orbit_cameras(o.test_views, o.camera_radius, o.resolution, o.fov_x, 1.1)) {
    toy.test.push_back({cam, render_image(cam, toy.truth, bvh, rc)});
  }

  for (std::size_t i = 0; i < o.init_points; ++i) {
    const GaussianPrimitive& src = toy.truth.primitives[i % toy.truth.size()];
    const Vec3 z(normal(rng), normal(rng), normal(rng));
    const Vec3 jitter(normal(rng), normal(rng), normal(rng));
    PointSample s;
    s.position = src.mu() +
                 effective_rotation(src, cfg.basis) * effective_scale(src, cfg.basis).cwiseProduct(0.5 * z) +
                 o.init_jitter * jitter;
    s.color = (sh_basis<double>(Vec3::UnitZ())[0] * src.sh(0)).cwiseMax(0.0).cwiseMin(1.0);
    toy.points.push_back(s);
  }
  return toy;
}

}  // namespace volgs
