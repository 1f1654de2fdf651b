#include "volgs/bvh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace volgs {

EllipsoidSupport make_support(const Vec3& center, const Mat3& rotation, const Vec3& semi_axes,
                              std::uint32_t index) {
  EllipsoidSupport s;
  s.center = center;
  s.rotation = rotation;
  s.semi_axes = semi_axes;
  s.to_unit = semi_axes.cwiseInverse().asDiagonal() * rotation.transpose();
  s.index = index;
  return s;
}

std::optional<EllipsoidSupport> support_of(const PreparedPrimitive& prim, std::uint32_t index) {
  if (prim.empty_support) return std::nullopt;
  return make_support(prim.mu, prim.rotation, prim.scale * prim.support_radius, index);
}

std::vector<EllipsoidSupport> collect_supports(const PreparedScene& prepared) {
  std::vector<EllipsoidSupport> out;
  out.reserve(prepared.primitives.size());
  for (std::size_t i = 0; i < prepared.primitives.size(); ++i) {
    if (auto s = support_of(prepared.primitives[i], static_cast<std::uint32_t>(i))) {
      out.push_back(*s);
    }
  }
  return out;
}

Aabb tight_aabb(const EllipsoidSupport& support) {
  const Mat3 scaled = support.rotation * support.semi_axes.asDiagonal();
  const Vec3 half = scaled.rowwise().norm();
  return {support.center - half, support.center + half};
}

Aabb scene_bounds(const PreparedScene& prepared) {
  Aabb box;
  for (const auto& s : collect_supports(prepared)) box.extend(tight_aabb(s));
  return box;
}

bool ellipsoid_line_interval(const Vec3& origin, const Vec3& direction,
                             const EllipsoidSupport& support, double& t_enter, double& t_exit) {
  const Vec3 o = support.to_unit * (origin - support.center);
  const Vec3 d = support.to_unit * direction;
  const double a = d.squaredNorm();
  if (a == 0.0) return false;
  // Closest approach to the centre, computed from the projected offset rather
  // than b^2 - ac to avoid cancellation.
  const double t_mid = -o.dot(d) / a;
  const double closest = (o + t_mid * d).squaredNorm();
  if (closest > 1.0) return false;
  const double half = std::sqrt((1.0 - closest) / a);
  t_enter = t_mid - half;
  t_exit = t_mid + half;
  return true;
}

bool segment_ellipsoid_intersect(const Vec3& origin, const Vec3& direction, double t_lo,
                                 double t_hi, const EllipsoidSupport& support) {
  double t_enter = 0.0;
  double t_exit = 0.0;
  if (!ellipsoid_line_interval(origin, direction, support, t_enter, t_exit)) return false;
  return t_enter <= t_hi && t_exit >= t_lo;
}

bool segment_aabb_intersect(const Vec3& origin, const Vec3& inv_direction, const Vec3& direction,
                            double t_lo, double t_hi, const Aabb& box) {
  for (int k = 0; k < 3; ++k) {
    if (direction[k] == 0.0) {
      if (origin[k] < box.min[k] || origin[k] > box.max[k]) return false;
      continue;
    }
    double t0 = (box.min[k] - origin[k]) * inv_direction[k];
    double t1 = (box.max[k] - origin[k]) * inv_direction[k];
    if (t0 > t1) std::swap(t0, t1);
    t_lo = std::max(t_lo, t0);
    t_hi = std::min(t_hi, t1);
    if (t_lo > t_hi) return false;
  }
  return true;
}

EllipsoidBvh::EllipsoidBvh(std::vector<EllipsoidSupport> supports, int leaf_size)
    : supports_(std::move(supports)), leaf_size_(std::max(1, leaf_size)) {
  if (supports_.empty()) return;
  std::vector<Aabb> boxes;
  boxes.reserve(supports_.size());
  for (const auto& s : supports_) boxes.push_back(tight_aabb(s));
  nodes_.reserve(2 * supports_.size());
  build(0, static_cast<std::uint32_t>(supports_.size()), boxes);
}

std::uint32_t EllipsoidBvh::build(std::uint32_t begin, std::uint32_t end,
                                  std::vector<Aabb>& boxes) {
  const auto node_index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroids;
  for (std::uint32_t i = begin; i < end; ++i) {
    box.extend(boxes[i]);
    const Vec3 c = boxes[i].center();
    centroids.extend({c, c});
  }
  nodes_[node_index].box = box;

  const std::uint32_t count = end - begin;
  Vec3 spread = centroids.extent();
  int axis = 0;
  spread.maxCoeff(&axis);
  if (count <= static_cast<std::uint32_t>(leaf_size_) || spread[axis] <= 0.0) {
    if (count > static_cast<std::uint32_t>(leaf_size_)) {
      // All centroids coincide: split by position in the array.
      axis = -1;
    } else {
      nodes_[node_index].offset = begin;
      nodes_[node_index].count = count;
      return node_index;
    }
  }

  const std::uint32_t mid = begin + count / 2;
  if (axis >= 0) {
    std::vector<std::uint32_t> order(count);
    std::iota(order.begin(), order.end(), begin);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return boxes[a].center()[axis] < boxes[b].center()[axis];
    });
    std::vector<EllipsoidSupport> s(count);
    std::vector<Aabb> b(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      s[i] = supports_[order[i]];
      b[i] = boxes[order[i]];
    }
    std::copy(s.begin(), s.end(), supports_.begin() + begin);
    std::copy(b.begin(), b.end(), boxes.begin() + begin);
  }
  build(begin, mid, boxes);
  const std::uint32_t right = build(mid, end, boxes);
  nodes_[node_index].offset = right;
  nodes_[node_index].count = 0;
  return node_index;
}

void EllipsoidBvh::query(const Vec3& origin, const Vec3& direction, double t_lo, double t_hi,
                         HitBuffer& buffer) const {
  for_each_box_hit(origin, direction, t_lo, t_hi, [&](const EllipsoidSupport& s) {
    if (!segment_ellipsoid_intersect(origin, direction, t_lo, t_hi, s)) return true;
    return buffer.push(s.index);
  });
}

std::string EllipsoidBvh::check_invariants(std::size_t num_primitives) const {
  std::ostringstream err;
  if (nodes_.empty()) {
    if (!supports_.empty()) err << "supports without nodes";
    return err.str();
  }
  std::vector<int> seen(num_primitives, 0);
  std::vector<std::uint32_t> stack{0};
  std::size_t leaf_items = 0;
  while (!stack.empty()) {
    const std::uint32_t idx = stack.back();
    stack.pop_back();
    const Node& node = nodes_[idx];
    if (node.box.is_empty()) err << "node " << idx << " has an empty box; ";
    if (node.is_leaf()) {
      if (node.count > static_cast<std::uint32_t>(leaf_size_)) err << "oversized leaf " << idx << "; ";
      for (std::uint32_t i = node.offset; i < node.offset + node.count; ++i) {
        const EllipsoidSupport& s = supports_[i];
        if (!node.box.contains(tight_aabb(s))) err << "leaf " << idx << " misses support " << i << "; ";
        if (s.index >= num_primitives) {
          err << "support index out of range; ";
        } else {
          ++seen[s.index];
        }
        ++leaf_items;
      }
    } else {
      const Node& left = nodes_[idx + 1];
      const Node& right = nodes_[node.offset];
      if (!node.box.contains(left.box) || !node.box.contains(right.box)) {
        err << "node " << idx << " does not contain its children; ";
      }
      stack.push_back(idx + 1);
      stack.push_back(node.offset);
    }
  }
  if (leaf_items != supports_.size()) err << "leaf item count mismatch; ";
  for (std::size_t i = 0; i < num_primitives; ++i) {
    if (seen[i] > 1) err << "primitive " << i << " appears " << seen[i] << " times; ";
  }
  return err.str();
}

EllipsoidBvh build_bvh(const PreparedScene& prepared, int leaf_size) {
  return EllipsoidBvh(collect_supports(prepared), leaf_size);
}

EllipsoidBvh build_bvh(const Scene& scene, int leaf_size) {
  return build_bvh(prepare_scene(scene), leaf_size);
}

std::vector<std::uint32_t> brute_force_query(std::span<const EllipsoidSupport> supports,
                                             const Vec3& origin, const Vec3& direction,
                                             double t_lo, double t_hi) {
  std::vector<std::uint32_t> out;
  if (t_lo > t_hi) return out;
  for (const auto& s : supports) {
    if (segment_ellipsoid_intersect(origin, direction, t_lo, t_hi, s)) out.push_back(s.index);
  }
  return out;
}

}  // namespace volgs
