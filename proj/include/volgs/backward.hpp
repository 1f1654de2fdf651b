#pragma once

#include <cstdint>
#include <vector>

#include "volgs/renderer.hpp"

namespace volgs {

/// dL/dtheta for every raw parameter, one column per primitive.
struct GradientBuffer {
  ParamMatrix grad;
  /// 1 when some ray received a non-truncated contribution from the primitive.
  std::vector<std::uint8_t> visible;

  GradientBuffer() = default;
  explicit GradientBuffer(std::size_t n) { reset(n); }

  void reset(std::size_t n) {
    grad = ParamMatrix::Zero(layout::kCount, Eigen::Index(n));
    visible.assign(n, 0);
  }
  std::size_t size() const { return visible.size(); }
};

/// Throws NumericError naming the parameter group of the first non-finite entry.
void check_finite(const GradientBuffer& gradients);

/// Replays the forward march of every ray and back-propagates dL/dC (one RGB
/// column per ray, C including the background term). When `forward` holds the
/// result of render() for the same inputs its colors are reused instead of
/// marching twice. Deterministic regardless of the thread count.
GradientBuffer backward(const RayBatch& rays, const Scene& scene, const EllipsoidBvh& bvh,
                        const RenderConfig& config, const Eigen::Matrix3Xd& color_gradients,
                        const RenderResult* forward = nullptr);

/// Running average of the per-view positional gradient norm, used to pick
/// primitives for densification.
struct DensificationStats {
  Eigen::VectorXd grad_norm_sum;
  /// Sum of dL/dmu over views; its direction orients clones.
  Eigen::Matrix3Xd grad_sum;
  Eigen::VectorXi views;

  void reset(std::size_t n) {
    grad_norm_sum = Eigen::VectorXd::Zero(Eigen::Index(n));
    grad_sum = Eigen::Matrix3Xd::Zero(3, Eigen::Index(n));
    views = Eigen::VectorXi::Zero(Eigen::Index(n));
  }
  std::size_t size() const { return static_cast<std::size_t>(views.size()); }
  void accumulate(const GradientBuffer& gradients);
  /// Zero for primitives never seen.
  Eigen::VectorXd average() const;
};

}  // namespace volgs
