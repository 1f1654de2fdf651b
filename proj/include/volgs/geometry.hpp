#pragma once

#include <cmath>
#include <string>

#include "volgs/errors.hpp"
#include "volgs/types.hpp"

namespace volgs {

/// Rotation matrix of the normalized quaternion q = (w, x, y, z).
template <typename Scalar>
Matrix3<Scalar> rotation_from_quaternion(const Vector4<Scalar>& q) {
  if (!q.allFinite()) throw ParameterError("quaternion has non-finite components");
  const Scalar n = q.norm();
  if (n == Scalar(0)) throw DegenerateRotationError("zero quaternion");
  const Vector4<Scalar> u = q / n;
  const Scalar w = u[0], x = u[1], y = u[2], z = u[3];
  Matrix3<Scalar> r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

/// Pulls dL/dR back onto the raw (unnormalized) quaternion.
template <typename Scalar>
Vector4<Scalar> rotation_gradient_to_quaternion(const Vector4<Scalar>& q,
                                                const Matrix3<Scalar>& dR) {
  const Scalar n = q.norm();
  const Vector4<Scalar> u = q / n;
  const Scalar w = u[0], x = u[1], y = u[2], z = u[3];
  Vector4<Scalar> g;
  // dR/dw
  g[0] = 2 * (-z * dR(0, 1) + y * dR(0, 2) + z * dR(1, 0) - x * dR(1, 2) - y * dR(2, 0) +
              x * dR(2, 1));
  // dR/dx
  g[1] = 2 * (y * dR(0, 1) + z * dR(0, 2) + y * dR(1, 0) - 2 * x * dR(1, 1) - w * dR(1, 2) +
              z * dR(2, 0) + w * dR(2, 1) - 2 * x * dR(2, 2));
  // dR/dy
  g[2] = 2 * (-2 * y * dR(0, 0) + x * dR(0, 1) + w * dR(0, 2) + x * dR(1, 0) + z * dR(1, 2) -
              w * dR(2, 0) + z * dR(2, 1) - 2 * y * dR(2, 2));
  // dR/dz
  g[3] = 2 * (-2 * z * dR(0, 0) - w * dR(0, 1) + x * dR(0, 2) + w * dR(1, 0) -
              2 * z * dR(1, 1) + y * dR(1, 2) + x * dR(2, 0) + y * dR(2, 1));
  // Project out the radial component: R depends on q only through q / |q|.
  return (g - u * u.dot(g)) / n;
}

template <typename Scalar>
struct Covariance {
  Matrix3<Scalar> sigma;
  Matrix3<Scalar> inverse;
};

/// Sigma = R diag(s^2) R^T and its closed-form inverse R diag(s^-2) R^T.
template <typename Scalar>
Covariance<Scalar> covariance_from(const Vector4<Scalar>& quat, const Vector3<Scalar>& scale) {
  if (!scale.allFinite()) throw ParameterError("scale has non-finite components");
  if ((scale.array() <= Scalar(0)).any()) throw ParameterError("scale must be positive");
  const Matrix3<Scalar> r = rotation_from_quaternion(quat);
  const Vector3<Scalar> s2 = scale.array().square();
  Covariance<Scalar> out;
  out.sigma = r * s2.asDiagonal() * r.transpose();
  out.inverse = r * s2.cwiseInverse().asDiagonal() * r.transpose();
  // Symmetrize away rounding.
  out.sigma = Scalar(0.5) * (out.sigma + out.sigma.transpose()).eval();
  out.inverse = Scalar(0.5) * (out.inverse + out.inverse.transpose()).eval();
  return out;
}

/// sqrt((x - mu)^T Sigma^-1 (x - mu)) evaluated in the principal frame.
template <typename Scalar>
Scalar mahalanobis(const Vector3<Scalar>& x, const Vector3<Scalar>& mu,
                   const Matrix3<Scalar>& rotation, const Vector3<Scalar>& scale) {
  const Vector3<Scalar> v = (rotation.transpose() * (x - mu)).cwiseQuotient(scale);
  return v.norm();
}

}  // namespace volgs
