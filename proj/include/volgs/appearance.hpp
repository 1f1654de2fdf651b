#pragma once

#include <array>
#include <cmath>

#include "volgs/scene.hpp"
#include "volgs/types.hpp"

namespace volgs {

/// Real orthonormal spherical harmonics up to degree 2, ordered (j, m) with m
/// ascending: Y00, Y1-1, Y10, Y11, Y2-2, Y2-1, Y20, Y21, Y22. No Condon-Shortley
/// phase, so Y11 = +c * x.
template <typename Scalar>
std::array<Scalar, kNumShCoeffs> sh_basis(const Vector3<Scalar>& d) {
  constexpr Scalar c0 = Scalar(0.28209479177387814);  // 1 / (2 sqrt(pi))
  constexpr Scalar c1 = Scalar(0.48860251190291992);  // sqrt(3 / (4 pi))
  constexpr Scalar c2a = Scalar(1.0925484305920792);  // sqrt(15 / (4 pi))
  constexpr Scalar c2b = Scalar(0.31539156525252005); // sqrt(5 / (16 pi))
  constexpr Scalar c2c = Scalar(0.54627421529603959); // sqrt(15 / (16 pi))
  const Scalar x = d[0], y = d[1], z = d[2];
  return {c0,
          c1 * y,
          c1 * z,
          c1 * x,
          c2a * x * y,
          c2a * y * z,
          c2b * (Scalar(3) * z * z - Scalar(1)),
          c2a * x * z,
          c2c * (x * x - y * y)};
}

/// Sum of coeffs.col(k) * Y_k(d) over the first (degree + 1)^2 basis functions.
/// `coeffs` is 3 x K with K >= (degree + 1)^2.
template <typename Derived>
Vector3<typename Derived::Scalar> eval_sh(const Eigen::MatrixBase<Derived>& coeffs, int degree,
                                          const Vector3<typename Derived::Scalar>& d) {
  using Scalar = typename Derived::Scalar;
  const auto y = sh_basis<Scalar>(d);
  Vector3<Scalar> out = Vector3<Scalar>::Zero();
  const int n = sh_coeff_count(degree);
  for (int k = 0; k < n; ++k) out += coeffs.col(k) * y[k];
  return out;
}

/// exp(lambda (d.p - 1)), in (0, 1] for lambda >= 0 and unit p.
template <typename Scalar>
Scalar sg_lobe(Scalar sharpness, const Vector3<Scalar>& axis, const Vector3<Scalar>& d) {
  using std::exp;
  return exp(sharpness * (d.dot(axis) - Scalar(1)));
}

/// Sum over the first `count` lobes of amplitudes.col(j) * lobe_j(d).
template <typename DerivedA, typename DerivedL, typename DerivedP>
Vector3<typename DerivedA::Scalar> eval_sg(const Eigen::MatrixBase<DerivedA>& amplitudes,
                                           const Eigen::MatrixBase<DerivedL>& sharpness,
                                           const Eigen::MatrixBase<DerivedP>& axes, int count,
                                           const Vector3<typename DerivedA::Scalar>& d) {
  using Scalar = typename DerivedA::Scalar;
  Vector3<Scalar> out = Vector3<Scalar>::Zero();
  for (int j = 0; j < count; ++j) {
    out += amplitudes.col(j) * sg_lobe<Scalar>(sharpness[j], axes.col(j), d);
  }
  return out;
}

inline Eigen::Map<const Eigen::Matrix<double, 3, kNumShCoeffs>> sh_coefficients(
    const GaussianPrimitive& prim) {
  return Eigen::Map<const Eigen::Matrix<double, 3, kNumShCoeffs>>(prim.raw.data() + layout::kSh);
}

/// Emitted radiance c_l(d) = SH part + SG part, gated by the config's unlocked
/// degree and lobe count.
Rgb eval_radiance(const GaussianPrimitive& prim, const SceneConfig& config, const Vec3& d);

/// Adds dL/dtheta for every appearance parameter of `prim` into `grad` given
/// dL/dc_l(d) = upstream. Locked parameters receive nothing.
void accumulate_radiance_gradients(const GaussianPrimitive& prim, const SceneConfig& config,
                                   const Vec3& d, const Rgb& upstream,
                                   Eigen::Ref<ParamVector> grad);

/// Convenience form returning a fresh gradient vector.
ParamVector radiance_gradients(const GaussianPrimitive& prim, const SceneConfig& config,
                               const Vec3& d, const Rgb& upstream);

}  // namespace volgs
