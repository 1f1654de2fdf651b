#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "volgs/bvh.hpp"
#include "volgs/camera.hpp"
#include "volgs/field.hpp"
#include "volgs/image.hpp"

namespace volgs {

struct RenderConfig {
  /// Distance between two samples along a ray.
  double dt = 0.00025;
  /// Samples per slab (B). One BVH query per slab.
  int slab_samples = 8;
  /// A ray stops once its transmittance is <= t_eps at a slab boundary.
  double t_eps = 1e-4;
  std::size_t hit_capacity = 512;
  int rays_per_pixel = 1;
  /// Overrides the scene's background when set.
  std::optional<Rgb> background;

  void validate() const;
};

struct RayState {
  Rgb color = Rgb::Zero();
  double transmittance = 1.0;
};

struct RenderStats {
  std::uint64_t rays = 0;
  std::uint64_t rays_in_bounds = 0;
  std::uint64_t slabs = 0;
  std::uint64_t slabs_with_hits = 0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  std::uint64_t overflows = 0;
  std::uint64_t early_terminations = 0;

  RenderStats& operator+=(const RenderStats& other);
};

struct RenderResult {
  /// C_R, without background.
  Eigen::Matrix3Xd accumulated;
  Eigen::VectorXd transmittance;
  /// C_R + T * background.
  Eigen::Matrix3Xd color;
  RenderStats stats;
};

struct Interval {
  double t0 = 0.0;
  double t1 = 0.0;
};

/// Slab-method intersection clipped to t >= 0; nullopt on a miss (t0 >= t1).
std::optional<Interval> intersect_scene_bbox(const Vec3& origin, const Vec3& direction,
                                             const Aabb& box);

/// Samples sit on a grid anchored at the ray origin: t_k = (k + 0.5) dt. The
/// range holds every k with t0 <= t_k < t1.
struct SampleRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  bool empty() const { return end <= begin; }
};
SampleRange sample_range(const Interval& interval, double dt);

inline double sample_position(std::int64_t k, double dt) { return (double(k) + 0.5) * dt; }

/// Composites samples [samples.begin, samples.end) front to back using only
/// `contributors`: alpha = 1 - exp(-sigma dt), C += T alpha c, T *= 1 - alpha.
void integrate_slab(RayState& state, const Vec3& origin, const Vec3& direction,
                    SampleRange samples, std::span<const std::uint32_t> contributors,
                    const PreparedScene& prepared, double dt);

/// Slab-by-slab ray casting over the BVH with early termination.
RenderResult render(const RayBatch& rays, const Scene& scene, const EllipsoidBvh& bvh,
                    const RenderConfig& config);

/// Brute-force oracle: same sampling, every primitive at every sample, no BVH,
/// no slabs, no early termination.
RenderResult render_reference(const RayBatch& rays, const Scene& scene,
                              const RenderConfig& config);

/// Marches one ray like render() and reports the state after every sample.
using SampleObserver = std::function<void(std::int64_t sample, const RayState& state)>;
RayState trace_ray(const Vec3& origin, const Vec3& direction, const Scene& scene,
                   const EllipsoidBvh& bvh, const RenderConfig& config,
                   const SampleObserver& observer);

/// Renders a full camera image (bvh built by the caller).
Image render_image(const Camera& camera, const Scene& scene, const EllipsoidBvh& bvh,
                   const RenderConfig& config, RenderStats* stats = nullptr);

Rgb background_of(const Scene& scene, const RenderConfig& config);

}  // namespace volgs
