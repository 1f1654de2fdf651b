#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace volgs {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

/// Linear RGB triple. Not clamped: emitted radiance may leave [0,1].
using Rgb = Eigen::Vector3d;

/// Numerically stable log(1 + exp(x)).
template <typename Scalar>
Scalar softplus(Scalar x) {
  using std::exp;
  using std::log1p;
  if (x > Scalar(30)) return x + log1p(exp(-x));
  return log1p(exp(x));
}

/// Derivative of softplus.
template <typename Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
  const Scalar e = exp(x);
  return e / (Scalar(1) + e);
}

/// Inverse of softplus for y > 0.
template <typename Scalar>
Scalar softplus_inverse(Scalar y) {
  using std::exp;
  using std::expm1;
  using std::log;
  if (y > Scalar(30)) return y + log(-std::expm1(-y));
  return log(expm1(y));
}

}  // namespace volgs
