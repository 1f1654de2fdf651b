#pragma once

// Shared slab march used by the forward renderer and the backward replay.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "volgs/appearance.hpp"
#include "volgs/renderer.hpp"

namespace volgs::detail {

/// Cached per (ray, primitive) quantities. With o' = M (o - mu) and d' = M d,
/// the squared distance at t is |o' + t d'|^2.
struct RayEntry {
  std::uint32_t prim = 0;
  Vec3 o_unit = Vec3::Zero();
  Vec3 d_unit = Vec3::Zero();
  double density = 0.0;
  double q_cutoff = 0.0;
  Rgb color = Rgb::Zero();
  bool color_ready = false;
  // Backward accumulators: sums of dL/dq, dL/dq t, dL/dq t^2, dL/d sigma_tilde, dL/dc_l.
  double g0 = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double g_density = 0.0;
  Rgb g_color = Rgb::Zero();
  bool touched = false;
};

struct SampleEval {
  std::int64_t k = 0;
  double t = 0.0;
  double sigma = 0.0;
  Rgb color = Rgb::Zero();
  double transmittance_before = 1.0;
  /// exp(-sigma dt)
  double attenuation = 1.0;
};

class MarchScratch {
 public:
  MarchScratch(std::size_t num_primitives, std::size_t capacity)
      : slots_(num_primitives, -1), hits_(capacity) {}

  void begin_ray() {
    for (const RayEntry& e : entries) slots_[e.prim] = -1;
    entries.clear();
  }

  std::int32_t entry_for(std::uint32_t prim, const Vec3& o, const Vec3& d,
                         const PreparedPrimitive& p) {
    std::int32_t& slot = slots_[prim];
    if (slot >= 0) return slot;
    RayEntry e;
    e.prim = prim;
    e.o_unit = p.to_unit * (o - p.mu);
    e.d_unit = p.to_unit * d;
    e.density = p.density;
    e.q_cutoff = p.q_cutoff;
    slot = static_cast<std::int32_t>(entries.size());
    entries.push_back(e);
    return slot;
  }

  HitBuffer& hits() { return hits_; }

  struct Candidate {
    std::uint32_t prim;
    double t_enter;
    double t_exit;
  };

  std::vector<RayEntry> entries;
  /// Supports crossed anywhere along the sampled part of the ray.
  std::vector<Candidate> candidates;
  std::vector<std::int32_t> contributors;
  std::vector<double> sigma_l;
  /// Untruncated basis value of each contributor at the current sample.
  std::vector<double> phi;

 private:
  std::vector<std::int32_t> slots_;
  HitBuffer hits_;
};

struct MarchContext {
  const PreparedScene* prepared = nullptr;
  const EllipsoidBvh* bvh = nullptr;
  const RenderConfig* config = nullptr;
};

struct NoSampleHook {
  void operator()(const SampleEval&, const RayState&, MarchScratch&) const {}
};

/// Marches one ray slab by slab. `on_sample` runs after every evaluated sample
/// with scratch.contributors / scratch.sigma_l describing that sample.
template <class OnSample = NoSampleHook>
RayState march_ray(const Vec3& o, const Vec3& d, const MarchContext& ctx, MarchScratch& scratch,
                   RenderStats& stats, OnSample&& on_sample = {}) {
  RayState state;
  ++stats.rays;
  scratch.begin_ray();
  const EllipsoidBvh& bvh = *ctx.bvh;
  if (bvh.empty()) return state;
  const auto interval = intersect_scene_bbox(o, d, bvh.bounds());
  if (!interval) return state;
  const RenderConfig& cfg = *ctx.config;
  const double dt = cfg.dt;
  const SampleRange range = sample_range(*interval, dt);
  if (range.empty()) return state;
  ++stats.rays_in_bounds;

  const PreparedScene& prepared = *ctx.prepared;
  const Scene& scene = *prepared.scene;
  const BasisFamily family = scene.config.basis.family;
  const double sigma_eps = scene.config.sigma_eps;
  HitBuffer& hits = scratch.hits();

  // One traversal per ray; each slab then keeps the candidates whose
  // intersection interval overlaps it, which is exactly the set a traversal
  // restricted to the slab segment would report.
  scratch.candidates.clear();
  bvh.for_each_box_hit(o, d, sample_position(range.begin, dt), sample_position(range.end - 1, dt),
                       [&](const EllipsoidSupport& sup) {
                         double enter = 0.0;
                         double exit = 0.0;
                         if (ellipsoid_line_interval(o, d, sup, enter, exit)) {
                           scratch.candidates.push_back({sup.index, enter, exit});
                         }
                         return true;
                       });

  for (std::int64_t first = range.begin; first < range.end; first += cfg.slab_samples) {
    if (state.transmittance <= cfg.t_eps) {
      ++stats.early_terminations;
      break;
    }
    const std::int64_t last = std::min<std::int64_t>(first + cfg.slab_samples, range.end);
    ++stats.slabs;
    hits.clear();
    const double t_lo = sample_position(first, dt);
    const double t_hi = sample_position(last - 1, dt);
    for (const auto& c : scratch.candidates) {
      if (c.t_enter <= t_hi && c.t_exit >= t_lo && !hits.push(c.prim)) break;
    }
    if (hits.overflow()) ++stats.overflows;
    if (hits.size() == 0) continue;
    ++stats.slabs_with_hits;
    stats.hits += hits.size();

    scratch.contributors.clear();
    for (std::uint32_t prim : hits.hits()) {
      scratch.contributors.push_back(scratch.entry_for(prim, o, d, prepared.primitives[prim]));
    }
    scratch.sigma_l.resize(scratch.contributors.size());
    scratch.phi.resize(scratch.contributors.size());

    for (std::int64_t k = first; k < last; ++k) {
      SampleEval s;
      s.k = k;
      s.t = sample_position(k, dt);
      Rgb weighted = Rgb::Zero();
      for (std::size_t j = 0; j < scratch.contributors.size(); ++j) {
        RayEntry& e = scratch.entries[scratch.contributors[j]];
        const double q = (e.o_unit + s.t * e.d_unit).squaredNorm();
        double sl = 0.0;
        double phi = 0.0;
        if (q <= e.q_cutoff) {
          phi = eval_basis_sq(family, q);
          sl = e.density * phi;
          if (sl < sigma_eps) sl = 0.0;
        }
        scratch.phi[j] = phi;
        scratch.sigma_l[j] = sl;
        if (sl == 0.0) continue;
        if (!e.color_ready) {
          e.color = eval_radiance(scene.primitives[e.prim], scene.config, d);
          e.color_ready = true;
        }
        s.sigma += sl;
        weighted += sl * e.color;
      }
      ++stats.samples;
      s.transmittance_before = state.transmittance;
      if (s.sigma > 0.0) {
        s.color = weighted / s.sigma;
        s.attenuation = std::exp(-s.sigma * dt);
        state.color += state.transmittance * (1.0 - s.attenuation) * s.color;
        state.transmittance *= s.attenuation;
      }
      on_sample(s, state, scratch);
    }
  }
  return state;
}

}  // namespace volgs::detail
