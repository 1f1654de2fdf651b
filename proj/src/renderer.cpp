#include "volgs/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "march.hpp"
#include "volgs/errors.hpp"

namespace volgs {

void RenderConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("render: dt must be positive");
  if (slab_samples < 1) throw ParameterError("render: slab_samples must be >= 1");
  if (!(t_eps >= 0.0 && t_eps < 1.0)) throw ParameterError("render: t_eps must lie in [0, 1)");
  if (hit_capacity < 1) throw ParameterError("render: hit_capacity must be >= 1");
  if (rays_per_pixel != 1 && rays_per_pixel != 4) {
    throw ParameterError("render: rays_per_pixel must be 1 or 4");
  }
  if (background && !background->allFinite()) throw ParameterError("render: non-finite background");
}

RenderStats& RenderStats::operator+=(const RenderStats& other) {
  rays += other.rays;
  rays_in_bounds += other.rays_in_bounds;
  slabs += other.slabs;
  slabs_with_hits += other.slabs_with_hits;
  hits += other.hits;
  samples += other.samples;
  overflows += other.overflows;
  early_terminations += other.early_terminations;
  return *this;
}

std::optional<Interval> intersect_scene_bbox(const Vec3& origin, const Vec3& direction,
                                             const Aabb& box) {
  if (box.is_empty()) return std::nullopt;
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (direction[a] == 0.0) {
      if (origin[a] < box.min[a] || origin[a] > box.max[a]) return std::nullopt;
      continue;
    }
    const double inv = 1.0 / direction[a];
    double ta = (box.min[a] - origin[a]) * inv;
    double tb = (box.max[a] - origin[a]) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (!(t0 < t1)) return std::nullopt;
  return Interval{t0, t1};
}

SampleRange sample_range(const Interval& interval, double dt) {
  SampleRange r;
  r.begin = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(interval.t0 / dt - 0.5)));
  r.end = static_cast<std::int64_t>(std::ceil(interval.t1 / dt - 0.5));
  // Guard the rounding of the division so that t0 <= t_k < t1 holds exactly.
  while (r.begin < r.end && sample_position(r.begin, dt) < interval.t0) ++r.begin;
  while (r.end > r.begin && sample_position(r.end - 1, dt) >= interval.t1) --r.end;
  while (sample_position(r.end, dt) < interval.t1) ++r.end;
  return r;
}

void integrate_slab(RayState& state, const Vec3& origin, const Vec3& direction,
                    SampleRange samples, std::span<const std::uint32_t> contributors,
                    const PreparedScene& prepared, double dt) {
  if (contributors.empty()) return;
  for (std::int64_t k = samples.begin; k < samples.end; ++k) {
    const Vec3 x = origin + sample_position(k, dt) * direction;
    const double sigma = density_at(x, contributors, prepared);
    if (sigma == 0.0) continue;
    const Rgb c = radiance_at(x, direction, contributors, prepared);
    const double attenuation = std::exp(-sigma * dt);
    state.color += state.transmittance * (1.0 - attenuation) * c;
    state.transmittance *= attenuation;
  }
}

Rgb background_of(const Scene& scene, const RenderConfig& config) {
  return config.background ? *config.background : scene.config.background;
}

namespace {

RenderResult make_result(std::size_t n) {
  RenderResult out;
  out.accumulated = Eigen::Matrix3Xd::Zero(3, Eigen::Index(n));
  out.transmittance = Eigen::VectorXd::Ones(Eigen::Index(n));
  out.color = Eigen::Matrix3Xd::Zero(3, Eigen::Index(n));
  return out;
}

void finish(RenderResult& out, const Rgb& bg) {
  out.color = out.accumulated + bg * out.transmittance.transpose();
}

}  // namespace

RenderResult render(const RayBatch& rays, const Scene& scene, const EllipsoidBvh& bvh,
                    const RenderConfig& config) {
  config.validate();
  const std::size_t n = rays.size();
  RenderResult out = make_result(n);
  const PreparedScene prepared = prepare_scene(scene);
  const detail::MarchContext ctx{&prepared, &bvh, &config};

#pragma omp parallel
  {
    detail::MarchScratch scratch(scene.size(), config.hit_capacity);
    RenderStats local;
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < std::int64_t(n); ++i) {
      const RayState s = detail::march_ray(rays.origins.col(i), rays.directions.col(i), ctx,
                                           scratch, local);
      out.accumulated.col(i) = s.color;
      out.transmittance[i] = s.transmittance;
    }
#pragma omp critical
    out.stats += local;
  }
  finish(out, background_of(scene, config));
  return out;
}

RenderResult render_reference(const RayBatch& rays, const Scene& scene,
                              const RenderConfig& config) {
  config.validate();
  const std::size_t n = rays.size();
  RenderResult out = make_result(n);
  const PreparedScene prepared = prepare_scene(scene);
  const Aabb bounds = scene_bounds(prepared);
  std::vector<std::uint32_t> all(scene.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);

  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 o = rays.origins.col(Eigen::Index(i));
    const Vec3 d = rays.directions.col(Eigen::Index(i));
    ++out.stats.rays;
    const auto interval = intersect_scene_bbox(o, d, bounds);
    if (!interval) continue;
    RayState state;
    const SampleRange range = sample_range(*interval, config.dt);
    out.stats.samples += std::uint64_t(std::max<std::int64_t>(0, range.end - range.begin));
    integrate_slab(state, o, d, range, all, prepared, config.dt);
    out.accumulated.col(Eigen::Index(i)) = state.color;
    out.transmittance[Eigen::Index(i)] = state.transmittance;
  }
  finish(out, background_of(scene, config));
  return out;
}

RayState trace_ray(const Vec3& origin, const Vec3& direction, const Scene& scene,
                   const EllipsoidBvh& bvh, const RenderConfig& config,
                   const SampleObserver& observer) {
  config.validate();
  const PreparedScene prepared = prepare_scene(scene);
  const detail::MarchContext ctx{&prepared, &bvh, &config};
  detail::MarchScratch scratch(scene.size(), config.hit_capacity);
  RenderStats stats;
  return detail::march_ray(origin, direction, ctx, scratch, stats,
                           [&](const detail::SampleEval& s, const RayState& state,
                               detail::MarchScratch&) { observer(s.k, state); });
}

Image render_image(const Camera& camera, const Scene& scene, const EllipsoidBvh& bvh,
                   const RenderConfig& config, RenderStats* stats) {
  const RayBatch rays = generate_rays(camera, config.rays_per_pixel);
  const RenderResult r = render(rays, scene, bvh, config);
  if (stats) *stats += r.stats;
  return image_from_rays(r.color, camera.width, camera.height, config.rays_per_pixel);
}

}  // namespace volgs
