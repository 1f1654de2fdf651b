#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "volgs/basis.hpp"
#include "volgs/types.hpp"

namespace volgs {

inline constexpr int kMaxShDegree = 2;
inline constexpr int kNumShCoeffs = (kMaxShDegree + 1) * (kMaxShDegree + 1);
inline constexpr int kMaxSgCount = 7;

constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// Offsets of each raw parameter group inside one primitive's parameter vector.
namespace layout {
inline constexpr int kMu = 0;
inline constexpr int kQuat = 3;
inline constexpr int kScale = 7;
inline constexpr int kDensity = 10;
inline constexpr int kSh = 11;
inline constexpr int kSgAmplitude = kSh + 3 * kNumShCoeffs;           // 38
inline constexpr int kSgSharpness = kSgAmplitude + 3 * kMaxSgCount;  // 59
inline constexpr int kSgAxis = kSgSharpness + kMaxSgCount;           // 66
inline constexpr int kCount = kSgAxis + 3 * kMaxSgCount;             // 87
}  // namespace layout

using ParamVector = Eigen::Matrix<double, layout::kCount, 1>;
using ParamMatrix = Eigen::Matrix<double, layout::kCount, Eigen::Dynamic>;

/// Parameter groups, used for learning rates and diagnostics.
enum class ParamGroup {
  position,
  rotation,
  scale,
  density,
  sh_dc,
  sh_rest,
  sg_amplitude,
  sg_sharpness,
  sg_axis
};
inline constexpr int kNumParamGroups = 9;

ParamGroup param_group_of(int offset);
const char* to_string(ParamGroup group);

/// One basis function: geometry, density and view-dependent appearance, all
/// stored raw (pre-activation) in a single 87-vector.
class GaussianPrimitive {
 public:
  ParamVector raw = ParamVector::Zero();

  auto mu() { return raw.segment<3>(layout::kMu); }
  auto mu() const { return raw.segment<3>(layout::kMu); }
  /// (w, x, y, z), normalized before use.
  auto quat() { return raw.segment<4>(layout::kQuat); }
  auto quat() const { return raw.segment<4>(layout::kQuat); }
  auto scale_raw() { return raw.segment<3>(layout::kScale); }
  auto scale_raw() const { return raw.segment<3>(layout::kScale); }
  double& density_raw() { return raw[layout::kDensity]; }
  double density_raw() const { return raw[layout::kDensity]; }
  auto sh(int k) { return raw.segment<3>(layout::kSh + 3 * k); }
  auto sh(int k) const { return raw.segment<3>(layout::kSh + 3 * k); }
  auto sg_amplitude(int j) { return raw.segment<3>(layout::kSgAmplitude + 3 * j); }
  auto sg_amplitude(int j) const { return raw.segment<3>(layout::kSgAmplitude + 3 * j); }
  double& sg_sharpness_raw(int j) { return raw[layout::kSgSharpness + j]; }
  double sg_sharpness_raw(int j) const { return raw[layout::kSgSharpness + j]; }
  auto sg_axis_raw(int j) { return raw.segment<3>(layout::kSgAxis + 3 * j); }
  auto sg_axis_raw(int j) const { return raw.segment<3>(layout::kSgAxis + 3 * j); }

  Vec3 scale() const { return scale_raw().array().exp(); }
  double density() const { return softplus(density_raw()); }
  double sg_sharpness(int j) const { return softplus(sg_sharpness_raw(j)); }
  Vec3 sg_axis(int j) const { return sg_axis_raw(j).normalized(); }
};

struct BasisConfig {
  BasisFamily family = BasisFamily::gaussian;
  /// Radial mode: r = |x - mu| / R with R = exp(scale_raw[0]); rotation unused.
  bool isotropic = false;
};

struct SceneConfig {
  BasisConfig basis;
  double sigma_eps = 0.1;
  int active_sh_degree = 0;
  int active_sg_count = 0;
  Rgb background = Rgb::Ones();

  /// Throws ParameterError when an invariant is violated.
  void validate() const;
};

struct Scene {
  std::vector<GaussianPrimitive> primitives;
  SceneConfig config;

  std::size_t size() const { return primitives.size(); }
  bool empty() const { return primitives.empty(); }
};

/// Activated scale honoring the isotropic flag.
Vec3 effective_scale(const GaussianPrimitive& prim, const BasisConfig& basis);

/// Rotation honoring the isotropic flag (identity in radial mode).
Mat3 effective_rotation(const GaussianPrimitive& prim, const BasisConfig& basis);

/// Mahalanobis distance (or scaled Euclidean distance in isotropic mode).
double mahalanobis(const Vec3& x, const GaussianPrimitive& prim, const BasisConfig& basis = {});

struct PointSample {
  Vec3 position;
  Rgb color;
};

struct InitOptions {
  double initial_density = 0.5;
};

/// One primitive per point: identity rotation, isotropic scale equal to the
/// mean distance to the three nearest neighbours, band-0 SH reproducing the
/// point color, everything else zero.
Scene init_from_point_cloud(std::span<const PointSample> points, const SceneConfig& config,
                            const InitOptions& options = {});

/// Throws ParameterError naming the first primitive that holds a non-finite value.
void check_finite(const Scene& scene);

}  // namespace volgs
