#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volgs/field.hpp"
#include "volgs/types.hpp"

namespace volgs {

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool is_empty() const { return (min.array() > max.array()).any(); }
  void extend(const Aabb& other) {
    min = min.cwiseMin(other.min);
    max = max.cwiseMax(other.max);
  }
  bool contains(const Aabb& other) const {
    return (min.array() <= other.min.array()).all() && (max.array() >= other.max.array()).all();
  }
  bool contains(const Vec3& p) const {
    return (min.array() <= p.array()).all() && (max.array() >= p.array()).all();
  }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
};

/// Truncated support of one primitive: the ellipsoid
/// |diag(1/semi_axes) R^T (x - center)| <= 1.
struct EllipsoidSupport {
  Vec3 center = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 semi_axes = Vec3::Ones();
  Mat3 to_unit = Mat3::Identity();
  std::uint32_t index = 0;
};

EllipsoidSupport make_support(const Vec3& center, const Mat3& rotation, const Vec3& semi_axes,
                              std::uint32_t index);

/// Semi-axes are s * r* for global families and s for compact ones; nullopt
/// when the support is empty.
std::optional<EllipsoidSupport> support_of(const PreparedPrimitive& prim, std::uint32_t index);

std::vector<EllipsoidSupport> collect_supports(const PreparedScene& prepared);

/// Tightest axis-aligned box around the ellipsoid: half-extent along axis i is
/// sqrt(sum_j (semi_j R_ij)^2).
Aabb tight_aabb(const EllipsoidSupport& support);

/// Union of all support boxes; empty when no primitive has a support.
Aabb scene_bounds(const PreparedScene& prepared);

/// Parameter interval where the infinite line origin + t * direction lies
/// inside the ellipsoid; false when the line misses it.
bool ellipsoid_line_interval(const Vec3& origin, const Vec3& direction,
                             const EllipsoidSupport& support, double& t_enter, double& t_exit);

/// True iff some t in [t_lo, t_hi] puts origin + t * direction inside the ellipsoid.
bool segment_ellipsoid_intersect(const Vec3& origin, const Vec3& direction, double t_lo,
                                 double t_hi, const EllipsoidSupport& support);

/// Segment against box, slab method.
bool segment_aabb_intersect(const Vec3& origin, const Vec3& inv_direction, const Vec3& direction,
                            double t_lo, double t_hi, const Aabb& box);

/// Fixed-capacity list of primitive indices collected along one segment.
class HitBuffer {
 public:
  explicit HitBuffer(std::size_t capacity = 512) : indices_(capacity) {}

  /// False (and sets the overflow flag) when the buffer is already full.
  bool push(std::uint32_t index) {
    if (count_ >= indices_.size()) {
      overflow_ = true;
      return false;
    }
    indices_[count_++] = index;
    return true;
  }
  void clear() {
    count_ = 0;
    overflow_ = false;
  }
  std::span<const std::uint32_t> hits() const { return {indices_.data(), count_}; }
  std::size_t size() const { return count_; }
  std::size_t capacity() const { return indices_.size(); }
  bool full() const { return count_ == indices_.size(); }
  bool overflow() const { return overflow_; }

 private:
  std::vector<std::uint32_t> indices_;
  std::size_t count_ = 0;
  bool overflow_ = false;
};

class EllipsoidBvh {
 public:
  struct Node {
    Aabb box;
    /// Leaf: first support in supports(). Internal: index of the right child
    /// (the left child is the next node).
    std::uint32_t offset = 0;
    /// Number of supports for a leaf, 0 for an internal node.
    std::uint32_t count = 0;
    bool is_leaf() const { return count > 0; }
  };

  EllipsoidBvh() = default;
  EllipsoidBvh(std::vector<EllipsoidSupport> supports, int leaf_size);

  bool empty() const { return nodes_.empty(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<EllipsoidSupport>& supports() const { return supports_; }
  int leaf_size() const { return leaf_size_; }
  /// Root box, i.e. the scene bounding box.
  Aabb bounds() const { return nodes_.empty() ? Aabb{} : nodes_.front().box; }

  /// Collects into `buffer` the indices of supports intersecting the segment,
  /// stopping once the buffer is full.
  void query(const Vec3& origin, const Vec3& direction, double t_lo, double t_hi,
             HitBuffer& buffer) const;

  /// Calls `visit(support)` for every support in a leaf whose box the segment
  /// crosses; `visit` returns false to stop the traversal.
  template <typename Visit>
  void for_each_box_hit(const Vec3& origin, const Vec3& direction, double t_lo, double t_hi,
                        Visit&& visit) const {
    if (nodes_.empty() || t_lo > t_hi) return;
    const Vec3 inv = direction.cwiseInverse();
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (!segment_aabb_intersect(origin, inv, direction, t_lo, t_hi, node.box)) continue;
      if (node.is_leaf()) {
        for (std::uint32_t i = node.offset; i < node.offset + node.count; ++i) {
          if (!visit(supports_[i])) return;
        }
      } else {
        stack[top++] = node.offset;
        stack[top++] = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
      }
    }
  }

  /// Containment and uniqueness checks; returns an empty string when the tree is valid.
  std::string check_invariants(std::size_t num_primitives) const;

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Aabb>& boxes);

  std::vector<Node> nodes_;
  std::vector<EllipsoidSupport> supports_;
  int leaf_size_ = 4;
};

/// Builds over every primitive with a non-empty support. Median split on the
/// longest centroid axis; deterministic for a given input order.
EllipsoidBvh build_bvh(const PreparedScene& prepared, int leaf_size = 4);
EllipsoidBvh build_bvh(const Scene& scene, int leaf_size = 4);

inline void query_slab(const EllipsoidBvh& bvh, const Vec3& origin, const Vec3& direction,
                       double t_lo, double t_hi, HitBuffer& buffer) {
  bvh.query(origin, direction, t_lo, t_hi, buffer);
}

/// O(N) reference for query_slab.
std::vector<std::uint32_t> brute_force_query(std::span<const EllipsoidSupport> supports,
                                             const Vec3& origin, const Vec3& direction,
                                             double t_lo, double t_hi);

}  // namespace volgs
