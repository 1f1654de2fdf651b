#include "volgs/backward.hpp"

#include <algorithm>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "march.hpp"
#include "volgs/errors.hpp"
#include "volgs/geometry.hpp"

namespace volgs {

namespace {

// Fixed number of gradient partitions so that the reduction order does not
// depend on how many threads run.
constexpr std::int64_t kBlocks = 16;

struct ReplayHook {
  Rgb final_color;
  Rgb upstream;
  double dt;
  BasisFamily family;

  void operator()(const detail::SampleEval& s, const RayState& after,
                  detail::MarchScratch& scratch) const {
    if (s.sigma == 0.0) return;
    const double weight = s.transmittance_before * (1.0 - s.attenuation);
    const double g_sigma =
        dt * upstream.dot(after.transmittance * s.color - (final_color - after.color));
    const Rgb g_color = weight * upstream;
    const double inv_sigma = 1.0 / s.sigma;
    for (std::size_t j = 0; j < scratch.contributors.size(); ++j) {
      const double sl = scratch.sigma_l[j];
      if (sl == 0.0) continue;
      detail::RayEntry& e = scratch.entries[scratch.contributors[j]];
      const double g_sl = g_sigma + g_color.dot(e.color - s.color) * inv_sigma;
      e.g_color += g_color * (sl * inv_sigma);
      const double q = (e.o_unit + s.t * e.d_unit).squaredNorm();
      const double phi = scratch.phi[j];
      e.g_density += g_sl * phi;
      const double g_q = g_sl * e.density * eval_basis_sq_derivative(family, q, phi);
      e.g0 += g_q;
      e.g1 += g_q * s.t;
      e.g2 += g_q * s.t * s.t;
      e.touched = true;
    }
  }
};

void flush_entry(const detail::RayEntry& e, const Vec3& o, const Vec3& d, const Scene& scene,
                 const PreparedPrimitive& p, ParamMatrix& grad,
                 std::vector<std::uint8_t>& visible) {
  const GaussianPrimitive& prim = scene.primitives[e.prim];
  const SceneConfig& cfg = scene.config;
  auto g = grad.col(e.prim);
  visible[e.prim] = 1;

  const Vec3 a = e.g0 * e.o_unit + e.g1 * e.d_unit;
  const Vec3 b = e.g1 * e.o_unit + e.g2 * e.d_unit;
  g.segment<3>(layout::kMu) += -2.0 * p.to_unit.transpose() * a;

  const Vec3 g_log_scale =
      -2.0 * (e.o_unit.cwiseProduct(a) + e.d_unit.cwiseProduct(b));
  if (cfg.basis.isotropic) {
    g[layout::kScale] += g_log_scale.sum();
  } else {
    g.segment<3>(layout::kScale) += g_log_scale;
    const Mat3 g_rotation =
        2.0 * ((o - p.mu) * a.transpose() + d * b.transpose()) *
        p.scale.cwiseInverse().asDiagonal();
    g.segment<4>(layout::kQuat) +=
        rotation_gradient_to_quaternion<double>(prim.quat(), g_rotation);
  }
  g[layout::kDensity] += e.g_density * sigmoid(prim.density_raw());
  accumulate_radiance_gradients(prim, cfg, d, e.g_color, g);
}

}  // namespace

void check_finite(const GradientBuffer& gradients) {
  for (Eigen::Index i = 0; i < gradients.grad.cols(); ++i) {
    for (int r = 0; r < layout::kCount; ++r) {
      if (!std::isfinite(gradients.grad(r, i))) {
        throw NumericError(std::string("non-finite gradient in group ") +
                           to_string(param_group_of(r)) + " of primitive " + std::to_string(i));
      }
    }
  }
}

GradientBuffer backward(const RayBatch& rays, const Scene& scene, const EllipsoidBvh& bvh,
                        const RenderConfig& config, const Eigen::Matrix3Xd& color_gradients,
                        const RenderResult* forward) {
  config.validate();
  const std::int64_t n_rays = std::int64_t(rays.size());
  if (color_gradients.cols() != n_rays) {
    throw DimensionError("backward: one gradient column per ray expected");
  }
  if (forward && forward->color.cols() != n_rays) {
    throw DimensionError("backward: forward result does not match the ray batch");
  }
  const std::size_t n = scene.size();
  GradientBuffer out(n);
  if (n == 0 || n_rays == 0) return out;

  const PreparedScene prepared = prepare_scene(scene);
  const detail::MarchContext ctx{&prepared, &bvh, &config};
  const Rgb bg = background_of(scene, config);
  const std::int64_t blocks = std::min(kBlocks, n_rays);
  int workers = 1;
#ifdef _OPENMP
  workers = std::max(1, omp_get_max_threads());
#endif
  const std::int64_t wave = std::min<std::int64_t>(workers, blocks);
  // One buffer per block of a wave; blocks are folded into `out` in index order.
  std::vector<GradientBuffer> partial(static_cast<std::size_t>(wave), GradientBuffer(n));
  std::vector<std::vector<std::uint32_t>> touched(static_cast<std::size_t>(wave));

  for (std::int64_t first = 0; first < blocks; first += wave) {
    const std::int64_t count = std::min(wave, blocks - first);
#pragma omp parallel
    {
      detail::MarchScratch scratch(n, config.hit_capacity);
      RenderStats stats;
#pragma omp for schedule(dynamic, 1)
      for (std::int64_t slot = 0; slot < count; ++slot) {
        const std::int64_t b = first + slot;
        GradientBuffer& buf = partial[std::size_t(slot)];
        std::vector<std::uint32_t>& list = touched[std::size_t(slot)];
        const std::int64_t begin = n_rays * b / blocks;
        const std::int64_t end = n_rays * (b + 1) / blocks;
        for (std::int64_t i = begin; i < end; ++i) {
          const Rgb upstream = color_gradients.col(i);
          if (upstream.isZero(0.0)) continue;
          const Vec3 o = rays.origins.col(i);
          const Vec3 d = rays.directions.col(i);
          Rgb final_color;
          if (forward) {
            final_color = forward->color.col(i);
          } else {
            const RayState s = detail::march_ray(o, d, ctx, scratch, stats);
            final_color = s.color + s.transmittance * bg;
          }
          ReplayHook hook{final_color, upstream, config.dt, scene.config.basis.family};
          detail::march_ray(o, d, ctx, scratch, stats, hook);
          for (const detail::RayEntry& e : scratch.entries) {
            if (!e.touched) continue;
            if (!buf.visible[e.prim]) list.push_back(e.prim);
            flush_entry(e, o, d, scene, prepared.primitives[e.prim], buf.grad, buf.visible);
          }
        }
      }
    }
    for (std::int64_t slot = 0; slot < count; ++slot) {
      GradientBuffer& buf = partial[std::size_t(slot)];
      std::vector<std::uint32_t>& list = touched[std::size_t(slot)];
      std::sort(list.begin(), list.end());
      for (std::uint32_t prim : list) {
        out.grad.col(prim) += buf.grad.col(prim);
        out.visible[prim] = 1;
        buf.grad.col(prim).setZero();
        buf.visible[prim] = 0;
      }
      list.clear();
    }
  }

  check_finite(out);
  return out;
}

void DensificationStats::accumulate(const GradientBuffer& gradients) {
  if (size() != gradients.size()) throw DimensionError("densification stats size mismatch");
  for (std::size_t i = 0; i < gradients.size(); ++i) {
    if (!gradients.visible[i]) continue;
    const Eigen::Index k = Eigen::Index(i);
    const Vec3 g = gradients.grad.col(k).segment<3>(layout::kMu);
    grad_norm_sum[k] += g.norm();
    grad_sum.col(k) += g;
    views[k] += 1;
  }
}

Eigen::VectorXd DensificationStats::average() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grad_norm_sum.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (views[i] > 0) out[i] = grad_norm_sum[i] / views[i];
  }
  return out;
}

}  // namespace volgs
