#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "volgs/errors.hpp"

namespace volgs {

enum class BasisFamily { gaussian, bump, wendland, inv_multiquadric, inv_quadratic, c0_matern };

enum class SupportKind { compact, global };

inline constexpr std::array<BasisFamily, 6> kAllBasisFamilies = {
    BasisFamily::gaussian,         BasisFamily::bump,          BasisFamily::wendland,
    BasisFamily::inv_multiquadric, BasisFamily::inv_quadratic, BasisFamily::c0_matern};

constexpr SupportKind support_kind(BasisFamily family) {
  return (family == BasisFamily::bump || family == BasisFamily::wendland) ? SupportKind::compact
                                                                          : SupportKind::global;
}

std::string_view to_string(BasisFamily family);

/// Parses one of the tag names returned by to_string(). Throws ParameterError otherwise.
BasisFamily parse_basis_family(std::string_view tag);

/// phi(r) for r >= 0. Every family satisfies phi(0) = 1 and is non-increasing;
/// compact families vanish for r >= 1.
template <typename Scalar>
Scalar eval_basis(BasisFamily family, Scalar r) {
  using std::exp;
  using std::sqrt;
  switch (family) {
    case BasisFamily::gaussian:
      return exp(-Scalar(0.5) * r * r);
    case BasisFamily::bump:
      if (r >= Scalar(1)) return Scalar(0);
      return exp(Scalar(1) - Scalar(1) / (Scalar(1) - r * r));
    case BasisFamily::wendland: {
      if (r >= Scalar(1)) return Scalar(0);
      const Scalar a = Scalar(1) - r;
      return a * a * a * a * (Scalar(4) * r + Scalar(1));
    }
    case BasisFamily::inv_multiquadric:
      return Scalar(1) / sqrt(Scalar(1) + r * r);
    case BasisFamily::inv_quadratic:
      return Scalar(1) / (Scalar(1) + r * r);
    case BasisFamily::c0_matern:
      return exp(-r);
  }
  return Scalar(0);
}

/// d phi / d r. The bump derivative is continuously extended by 0 at r = 1.
template <typename Scalar>
Scalar eval_basis_derivative(BasisFamily family, Scalar r) {
  using std::exp;
  using std::pow;
  using std::sqrt;
  switch (family) {
    case BasisFamily::gaussian:
      return -r * exp(-Scalar(0.5) * r * r);
    case BasisFamily::bump: {
      if (r >= Scalar(1)) return Scalar(0);
      const Scalar phi = eval_basis(family, r);
      if (phi == Scalar(0)) return Scalar(0);
      const Scalar d = Scalar(1) - r * r;
      return phi * (-Scalar(2) * r / (d * d));
    }
    case BasisFamily::wendland: {
      if (r >= Scalar(1)) return Scalar(0);
      const Scalar a = Scalar(1) - r;
      return -Scalar(20) * r * a * a * a;
    }
    case BasisFamily::inv_multiquadric:
      return -r * pow(Scalar(1) + r * r, Scalar(-1.5));
    case BasisFamily::inv_quadratic: {
      const Scalar d = Scalar(1) + r * r;
      return -Scalar(2) * r / (d * d);
    }
    case BasisFamily::c0_matern:
      return -exp(-r);
  }
  return Scalar(0);
}

/// phi as a function of the squared distance q = r^2. This is what the
/// renderer evaluates per sample; it avoids a square root for most families.
template <typename Scalar>
Scalar eval_basis_sq(BasisFamily family, Scalar q) {
  using std::exp;
  using std::sqrt;
  switch (family) {
    case BasisFamily::gaussian:
      return exp(-Scalar(0.5) * q);
    case BasisFamily::bump:
      if (q >= Scalar(1)) return Scalar(0);
      return exp(Scalar(1) - Scalar(1) / (Scalar(1) - q));
    case BasisFamily::inv_multiquadric:
      return Scalar(1) / sqrt(Scalar(1) + q);
    case BasisFamily::inv_quadratic:
      return Scalar(1) / (Scalar(1) + q);
    case BasisFamily::wendland:
    case BasisFamily::c0_matern:
      return eval_basis(family, sqrt(q));
  }
  return Scalar(0);
}

/// d phi / d q with q = r^2. Finite at q = 0 for every family except the
/// C0-Matern cone, whose derivative is set to 0 at the apex.
template <typename Scalar>
Scalar eval_basis_sq_derivative(BasisFamily family, Scalar q) {
  using std::exp;
  using std::pow;
  using std::sqrt;
  switch (family) {
    case BasisFamily::gaussian:
      return -Scalar(0.5) * exp(-Scalar(0.5) * q);
    case BasisFamily::bump: {
      if (q >= Scalar(1)) return Scalar(0);
      const Scalar phi = eval_basis_sq(family, q);
      if (phi == Scalar(0)) return Scalar(0);
      const Scalar d = Scalar(1) - q;
      return -phi / (d * d);
    }
    case BasisFamily::wendland: {
      const Scalar r = sqrt(q);
      if (r >= Scalar(1)) return Scalar(0);
      const Scalar a = Scalar(1) - r;
      return -Scalar(10) * a * a * a;
    }
    case BasisFamily::inv_multiquadric:
      return -Scalar(0.5) * pow(Scalar(1) + q, Scalar(-1.5));
    case BasisFamily::inv_quadratic: {
      const Scalar d = Scalar(1) + q;
      return -Scalar(1) / (d * d);
    }
    case BasisFamily::c0_matern: {
      if (q <= Scalar(0)) return Scalar(0);
      const Scalar r = sqrt(q);
      return -exp(-r) / (Scalar(2) * r);
    }
  }
  return Scalar(0);
}

/// Same as eval_basis_sq_derivative when phi = eval_basis_sq(family, q) is
/// already known; saves the exponential of the exp-based families.
template <typename Scalar>
Scalar eval_basis_sq_derivative(BasisFamily family, Scalar q, Scalar phi) {
  using std::sqrt;
  switch (family) {
    case BasisFamily::gaussian:
      return -Scalar(0.5) * phi;
    case BasisFamily::bump: {
      if (q >= Scalar(1) || phi == Scalar(0)) return Scalar(0);
      const Scalar d = Scalar(1) - q;
      return -phi / (d * d);
    }
    case BasisFamily::inv_multiquadric:
      return -Scalar(0.5) * phi * phi * phi;
    case BasisFamily::inv_quadratic:
      return -phi * phi;
    case BasisFamily::c0_matern: {
      if (q <= Scalar(0)) return Scalar(0);
      return -phi / (Scalar(2) * sqrt(q));
    }
    case BasisFamily::wendland:
      return eval_basis_sq_derivative(family, q);
  }
  return Scalar(0);
}

/// Radius r* of the truncated support, i.e. sigma_tilde * phi(r*) = sigma_eps for
/// global families and 1 for compact ones. Returns nullopt when a global
/// family never reaches the threshold (the primitive contributes nothing).
template <typename Scalar>
std::optional<Scalar> support_radius(BasisFamily family, Scalar sigma_tilde, Scalar sigma_eps) {
  using std::log;
  using std::sqrt;
  if (support_kind(family) == SupportKind::compact) return Scalar(1);
  if (!(sigma_eps < sigma_tilde)) return std::nullopt;
  const Scalar y = sigma_eps / sigma_tilde;
  switch (family) {
    case BasisFamily::gaussian:
      return sqrt(-Scalar(2) * log(y));
    case BasisFamily::inv_multiquadric:
      return sqrt(Scalar(1) / (y * y) - Scalar(1));
    case BasisFamily::inv_quadratic:
      return sqrt(Scalar(1) / y - Scalar(1));
    case BasisFamily::c0_matern:
      return -log(y);
    default:
      break;
  }
  return std::nullopt;
}

}  // namespace volgs
