#include "volgs/selfcheck.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "volgs/appearance.hpp"
#include "volgs/backward.hpp"
#include "volgs/loss.hpp"

namespace volgs {

namespace {

Scene random_scene(std::mt19937_64& rng, std::size_t n, BasisFamily family, double sigma_eps) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Scene s;
  s.config.basis.family = family;
  s.config.sigma_eps = sigma_eps;
  s.config.active_sh_degree = kMaxShDegree;
  s.config.active_sg_count = kMaxSgCount;
  s.config.background = Rgb(0.2, 0.4, 0.6);
  for (std::size_t i = 0; i < n; ++i) {
    GaussianPrimitive p;
    for (int k = 0; k < layout::kCount; ++k) p.raw[k] = 0.3 * u(rng);
    p.mu() = 0.5 * Vec3(u(rng), u(rng), u(rng));
    p.quat() = Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)).normalized();
    p.scale_raw() = Vec3(std::log(0.25), std::log(0.3), std::log(0.35)) + 0.2 * Vec3(u(rng), u(rng), u(rng));
    p.density_raw() = 2.0 + u(rng);
    p.sh(0) = Rgb(1.5 + u(rng), 1.5 + u(rng), 1.5 + u(rng));
    for (int j = 0; j < kMaxSgCount; ++j) p.sg_axis_raw(j) = Vec3(u(rng), u(rng), u(rng)) + Vec3(0, 0, 1.5);
    s.primitives.push_back(p);
  }
  return s;
}

Camera small_camera(int size) {
  return look_at(Vec3(0.3, -0.2, -3.0), Vec3::Zero(), Vec3::UnitY() * -1.0, size, size, 0.7);
}

CheckResult gradient_check(std::mt19937_64& rng) {
  CheckResult r{"gradients match central differences", true, ""};
  const Camera cam = small_camera(6);
  const RayBatch rays = generate_rays(cam);
  RenderConfig rc;
  rc.dt = 0.02;
  rc.t_eps = 0.0;
  Scene scene = random_scene(rng, 3, BasisFamily::gaussian, 1e-6);
  Image target(cam.width, cam.height, Rgb(0.3, 0.5, 0.7));
  auto eval = [&](const Scene& s) {
    const EllipsoidBvh bvh = build_bvh(s);
    const RenderResult res = render(rays, s, bvh, rc);
    return loss(image_from_rays(res.color, cam.width, cam.height, 1), target, 0.2);
  };
  const EllipsoidBvh bvh = build_bvh(scene);
  const RenderResult fwd = render(rays, scene, bvh, rc);
  const LossGradient lg = loss_with_gradient(image_from_rays(fwd.color, cam.width, cam.height, 1), target, 0.2);
  const GradientBuffer g = backward(rays, scene, bvh, rc, ray_gradients_from_image(lg.gradient, 1), &fwd);
  int failures = 0;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    for (int k = 0; k < layout::kCount; ++k) {
      const double x = scene.primitives[i].raw[k];
      const double h = 1e-4 * std::max(1.0, std::abs(x));
      Scene plus = scene;
      Scene minus = scene;
      plus.primitives[i].raw[k] = x + h;
      minus.primitives[i].raw[k] = x - h;
      const double fd = (eval(plus) - eval(minus)) / (2.0 * h);
      const double an = g.grad(k, Eigen::Index(i));
      const double err = std::abs(fd - an);
      if (err > 1e-7 && err > 2e-3 * std::max(std::abs(fd), std::abs(an))) {
        ++failures;
        if (failures == 1) {
          std::ostringstream msg;
          msg << to_string(param_group_of(k)) << " of primitive " << i << ": analytic " << an
              << " vs numeric " << fd;
          r.detail = msg.str();
        }
      }
    }
  }
  r.passed = failures == 0;
  if (r.passed) r.detail = std::to_string(scene.size() * layout::kCount) + " parameters";
  return r;
}

CheckResult oracle_check(std::mt19937_64& rng) {
  CheckResult r{"renderer matches brute-force integrator", true, ""};
  const Camera cam = small_camera(8);
  const RayBatch rays = generate_rays(cam);
  RenderConfig rc;
  rc.dt = 0.01;
  rc.t_eps = 0.0;
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const Scene scene = random_scene(rng, 10, BasisFamily::wendland, 0.1);
    const RenderResult a = render(rays, scene, build_bvh(scene), rc);
    const RenderResult b = render_reference(rays, scene, rc);
    worst = std::max(worst, (a.color - b.color).cwiseAbs().maxCoeff());
  }
  r.passed = worst <= 1e-6;
  r.detail = "max difference " + std::to_string(worst);
  return r;
}

CheckResult slab_check(std::mt19937_64& rng) {
  CheckResult r{"output independent of slab size", true, ""};
  const Camera cam = small_camera(8);
  const RayBatch rays = generate_rays(cam);
  const Scene scene = random_scene(rng, 10, BasisFamily::inv_quadratic, 0.1);
  const EllipsoidBvh bvh = build_bvh(scene);
  RenderConfig rc;
  rc.dt = 0.01;
  rc.t_eps = 0.0;
  rc.slab_samples = 1;
  const RenderResult base = render(rays, scene, bvh, rc);
  double worst = 0.0;
  for (int b : {4, 8, 16}) {
    rc.slab_samples = b;
    worst = std::max(worst, (render(rays, scene, bvh, rc).color - base.color).cwiseAbs().maxCoeff());
  }
  r.passed = worst <= 1e-6;
  r.detail = "max difference " + std::to_string(worst);
  return r;
}

CheckResult bvh_check(std::mt19937_64& rng) {
  CheckResult r{"BVH queries match a linear scan", true, ""};
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Scene scene = random_scene(rng, 40, BasisFamily::gaussian, 0.1);
    const PreparedScene prepared = prepare_scene(scene);
    const EllipsoidBvh bvh = build_bvh(prepared);
    const Vec3 o(2.0 * u(rng), 2.0 * u(rng), 2.0 * u(rng));
    const Vec3 d = Vec3(u(rng), u(rng), u(rng)).normalized();
    const double t0 = 3.0 * std::abs(u(rng));
    const double t1 = t0 + 2.0 * std::abs(u(rng));
    HitBuffer hits(1024);
    bvh.query(o, d, t0, t1, hits);
    const std::set<std::uint32_t> got(hits.hits().begin(), hits.hits().end());
    const auto ref = brute_force_query(collect_supports(prepared), o, d, t0, t1);
    if (got != std::set<std::uint32_t>(ref.begin(), ref.end())) ++mismatches;
  }
  r.passed = mismatches == 0;
  r.detail = std::to_string(mismatches) + " mismatching queries out of 50";
  return r;
}

}  // namespace

std::vector<CheckResult> run_self_checks(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  out.push_back(gradient_check(rng));
  out.push_back(oracle_check(rng));
  out.push_back(slab_check(rng));
  out.push_back(bvh_check(rng));
  return out;
}

}  // namespace volgs
