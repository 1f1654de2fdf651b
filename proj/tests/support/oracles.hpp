#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "volgs/backward.hpp"
#include "volgs/loss.hpp"

namespace volgs::testing {

struct RandomSceneOptions {
  BasisFamily family = BasisFamily::gaussian;
  double sigma_eps = 0.1;
  bool isotropic = false;
  int sh_degree = kMaxShDegree;
  int sg_count = kMaxSgCount;
  double spread = 0.5;
  double min_scale = 0.15;
  double max_scale = 0.35;
  double min_density = 1.0;
  double max_density = 6.0;
  /// Colours kept inside [0, 1] (band-0 SH only, other terms zero).
  bool unit_colors = false;
  Rgb background = Rgb(0.2, 0.4, 0.6);
};

inline Scene random_scene(std::mt19937_64& rng, std::size_t n, const RandomSceneOptions& o = {}) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Scene s;
  s.config.basis.family = o.family;
  s.config.basis.isotropic = o.isotropic;
  s.config.sigma_eps = o.sigma_eps;
  s.config.active_sh_degree = o.sh_degree;
  s.config.active_sg_count = o.sg_count;
  s.config.background = o.background;
  for (std::size_t i = 0; i < n; ++i) {
    GaussianPrimitive p;
    if (!o.unit_colors) {
      for (int k = layout::kSh; k < layout::kCount; ++k) p.raw[k] = 0.3 * u(rng);
    }
    p.mu() = o.spread * Vec3(u(rng), u(rng), u(rng));
    p.quat() = Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)).normalized();
    for (int a = 0; a < 3; ++a) {
      p.scale_raw()[a] = std::log(o.min_scale + (o.max_scale - o.min_scale) * u01(rng));
    }
    p.density_raw() = softplus_inverse(o.min_density + (o.max_density - o.min_density) * u01(rng));
    const double y00 = 0.5 / std::sqrt(std::numbers::pi);
    for (int c = 0; c < 3; ++c) {
      p.sh(0)[c] = o.unit_colors ? u01(rng) / y00 : (1.5 + u(rng));
    }
    for (int j = 0; j < kMaxSgCount; ++j) {
      p.sg_axis_raw(j) = Vec3(u(rng), u(rng), u(rng)) + Vec3(0.0, 0.0, 1.5);
    }
    s.primitives.push_back(p);
  }
  return s;
}

/// Camera on the -z side looking at the origin.
inline Camera test_camera(int size, double fov = 0.7) {
  return look_at(Vec3(0.3, -0.2, -3.0), Vec3::Zero(), -Vec3::UnitY(), size, size, fov);
}

// Real spherical harmonics from associated Legendre polynomials, without the
// Condon-Shortley phase.
inline double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

inline double assoc_legendre(int l, int m, double x) {
  // Rodrigues-free recurrence for P_l^m without the (-1)^m factor.
  double pmm = 1.0;
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  for (int i = 1; i <= m; ++i) pmm *= (2.0 * i - 1.0) * s;
  if (l == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = ((2.0 * ll - 1.0) * x * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

inline double real_sh(int l, int m, const Vec3& d) {
  const double theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
  const double phi = std::atan2(d.y(), d.x());
  const int am = std::abs(m);
  const double k = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * factorial(l - am) /
                             factorial(l + am));
  const double p = assoc_legendre(l, am, std::cos(theta));
  if (m == 0) return k * p;
  if (m > 0) return std::sqrt(2.0) * k * p * std::cos(m * phi);
  return std::sqrt(2.0) * k * p * std::sin(am * phi);
}

/// Direct windowed SSIM: 11x11 Gaussian weights (sigma 1.5, normalized over
/// the full window), zero outside the image.
inline double brute_force_ssim(const Image& a, const Image& b) {
  double w[11][11];
  double total = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * 1.5 * 1.5));
      total += w[i][j];
    }
  }
  const double c1 = 1e-4;
  const double c2 = 9e-4;
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < a.height; ++y) {
      for (int x = 0; x < a.width; ++x) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int i = 0; i < 11; ++i) {
          for (int j = 0; j < 11; ++j) {
            const int yy = y + i - 5;
            const int xx = x + j - 5;
            if (yy < 0 || yy >= a.height || xx < 0 || xx >= a.width) continue;
            const double g = w[i][j] / total;
            const double va = a.pixels(c, a.index(xx, yy));
            const double vb = b.pixels(c, b.index(xx, yy));
            mx += g * va;
            my += g * vb;
            sxx += g * va * va;
            syy += g * vb * vb;
            sxy += g * va * vb;
          }
        }
        sxx -= mx * mx;
        syy -= my * my;
        sxy -= mx * my;
        sum += ((2 * mx * my + c1) * (2 * sxy + c2)) /
               ((mx * mx + my * my + c1) * (sxx + syy + c2));
      }
    }
  }
  return sum / (3.0 * a.num_pixels());
}

/// Central difference with a step that starts at `rel_step` (relative) and
/// halves while D(h) and D(h/2) disagree, so that kinks and truncation jumps
/// near x end up outside the stencil.
inline double finite_difference(const std::function<double(double)>& f, double x,
                                double rel_step = 1e-4) {
  double h = rel_step * std::max(1.0, std::abs(x));
  auto d = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
  double prev = d(h);
  for (int i = 0; i < 12; ++i) {
    const double next = d(0.5 * h);
    const double scale = std::max(std::abs(next), std::abs(prev));
    if (std::abs(next - prev) <= std::max(1e-4 * scale, 2e-8)) return next;
    prev = next;
    h *= 0.5;
  }
  return prev;
}

struct GradientFixture {
  Camera camera;
  RayBatch rays;
  RenderConfig render;
  Image target;
  double lambda = kDefaultSsimWeight;

  double loss_of(const Scene& scene) const {
    const RenderResult r = volgs::render(rays, scene, build_bvh(scene), render);
    return volgs::loss(image_from_rays(r.color, camera.width, camera.height, render.rays_per_pixel),
                       target, lambda);
  }

  GradientBuffer gradients_of(const Scene& scene) const {
    const EllipsoidBvh bvh = build_bvh(scene);
    const RenderResult r = volgs::render(rays, scene, bvh, render);
    const LossGradient lg = loss_with_gradient(
        image_from_rays(r.color, camera.width, camera.height, render.rays_per_pixel), target, lambda);
    return backward(rays, scene, bvh, render,
                    ray_gradients_from_image(lg.gradient, render.rays_per_pixel), &r);
  }
};

inline GradientFixture gradient_fixture(std::mt19937_64& rng, int size = 8) {
  GradientFixture f;
  f.camera = test_camera(size);
  f.rays = generate_rays(f.camera);
  f.render.dt = 0.02;
  f.render.t_eps = 0.0;
  f.target = Image(size, size);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < f.target.pixels.cols(); ++i) {
    f.target.pixels.col(i) = Eigen::Array3d(u(rng), u(rng), u(rng));
  }
  return f;
}

struct GradientMismatch {
  std::size_t primitive = 0;
  int offset = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares every raw parameter of the selected primitives against central
/// differences; returns the mismatches under rel / abs-floor tolerances.
inline std::vector<GradientMismatch> compare_gradients(const GradientFixture& f, const Scene& scene,
                                                       const std::vector<std::size_t>& prims,
                                                       double rel_tol = 1e-3,
                                                       double abs_floor = 1e-7) {
  const GradientBuffer g = f.gradients_of(scene);
  std::vector<GradientMismatch> bad;
  for (std::size_t i : prims) {
    for (int k = 0; k < layout::kCount; ++k) {
      Scene probe = scene;
      auto fn = [&](double v) {
        probe.primitives[i].raw[k] = v;
        return f.loss_of(probe);
      };
      const double num = finite_difference(fn, scene.primitives[i].raw[k]);
      const double an = g.grad(k, Eigen::Index(i));
      const double err = std::abs(num - an);
      if (err > abs_floor && err > rel_tol * std::max(std::abs(num), std::abs(an))) {
        bad.push_back({i, k, an, num});
      }
    }
  }
  return bad;
}

}  // namespace volgs::testing
