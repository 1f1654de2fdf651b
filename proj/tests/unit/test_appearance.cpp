#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "volgs/appearance.hpp"

using namespace volgs;

namespace {

Vec3 random_dir(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

GaussianPrimitive random_prim(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GaussianPrimitive p;
  for (int k = layout::kSh; k < layout::kCount; ++k) p.raw[k] = u(rng);
  // Keep lobe axes away from the origin where normalization blows up.
  for (int j = 0; j < kMaxSgCount; ++j) p.sg_axis_raw(j) = random_dir(rng) * (0.5 + 0.5 * (u(rng) + 1.0));
  return p;
}

SceneConfig unlocked() {
  SceneConfig c;
  c.active_sh_degree = kMaxShDegree;
  c.active_sg_count = kMaxSgCount;
  return c;
}

}  // namespace

TEST_CASE("SH basis matches the Legendre oracle") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 500; ++i) {
    const Vec3 d = random_dir(rng);
    const auto y = sh_basis<double>(d);
    int k = 0;
    for (int l = 0; l <= kMaxShDegree; ++l) {
      for (int m = -l; m <= l; ++m, ++k) {
        CHECK(y[k] == doctest::Approx(testing::real_sh(l, m, d)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("SH examples") {
  Eigen::Matrix<double, 3, kNumShCoeffs> c = Eigen::Matrix<double, 3, kNumShCoeffs>::Zero();
  const Vec3 d = Vec3(1, 2, 3).normalized();
  CHECK(eval_sh(c, 2, d).isZero());
  c.col(0) = Vec3::Ones();
  CHECK((eval_sh(c, 0, d) - Vec3::Constant(0.282095)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((eval_sh(c, 0, d) - eval_sh(c, 0, Vec3(-d))).norm() == 0.0);
  c.setZero();
  c.col(2) = Vec3(1, 2, 3);  // Y10
  CHECK((eval_sh(c, 1, Vec3::UnitZ()) + eval_sh(c, 1, Vec3(-Vec3::UnitZ()))).norm() < 1e-15);
  CHECK(eval_sh(c, 1, Vec3::UnitZ()).norm() > 0.0);
}

TEST_CASE("SH is linear in the coefficients") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  using Coeffs = Eigen::Matrix<double, 3, kNumShCoeffs>;
  for (int i = 0; i < 100; ++i) {
    const Coeffs a = Coeffs::NullaryExpr([&] { return u(rng); });
    const Coeffs b = Coeffs::NullaryExpr([&] { return u(rng); });
    const Vec3 d = random_dir(rng);
    const double s = u(rng);
    CHECK((eval_sh(Coeffs(a + s * b), 2, d) - eval_sh(a, 2, d) - s * eval_sh(b, 2, d)).norm() < 1e-12);
  }
}

TEST_CASE("SG examples") {
  const Vec3 p = Vec3(0, 0, 1);
  CHECK(sg_lobe(0.0, p, Vec3(1, 0, 0)) == 1.0);
  CHECK(sg_lobe(25.0, p, p) == 1.0);
  CHECK(sg_lobe(10.0, p, Vec3(1, 0, 0)) == doctest::Approx(4.54e-5).epsilon(1e-3));

  Eigen::Matrix<double, 3, 2> k;
  k << 1, 2, 3, 4, 5, 6;
  Eigen::Vector2d lambda(0.0, 0.0);
  Eigen::Matrix<double, 3, 2> axes;
  axes << 1, 0, 0, 1, 0, 0;
  CHECK((eval_sg(k, lambda, axes, 2, Vec3(0, 0, 1)) - Vec3(3, 7, 11)).norm() < 1e-15);
}

TEST_CASE("SG lobe factor is in (0, 1] and maximal at the axis") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = random_dir(rng);
    const Vec3 d = random_dir(rng);
    const double l = u(rng);
    const double f = sg_lobe(l, p, d);
    CHECK(f > 0.0);
    CHECK(f <= 1.0);
    CHECK(f <= sg_lobe(l, p, p));
  }
}

TEST_CASE("radiance gating") {
  std::mt19937_64 rng(9);
  GaussianPrimitive prim = random_prim(rng);
  const Vec3 d = random_dir(rng);
  const auto sh = sh_coefficients(prim);

  SceneConfig c;
  CHECK((eval_radiance(prim, c, d) - eval_sh(sh, 0, d)).norm() < 1e-15);

  c = unlocked();
  GaussianPrimitive no_sg = prim;
  no_sg.raw.segment<3 * kMaxSgCount>(layout::kSgAmplitude).setZero();
  CHECK((eval_radiance(no_sg, c, d) - eval_sh(sh, 2, d)).norm() < 1e-14);

  // Unlocking one lobe adds exactly that lobe.
  c.active_sg_count = 0;
  const Rgb before = eval_radiance(prim, c, d);
  c.active_sg_count = 1;
  const Rgb after = eval_radiance(prim, c, d);
  const Rgb lobe = prim.sg_amplitude(0) * sg_lobe(prim.sg_sharpness(0), prim.sg_axis(0), d);
  CHECK((after - before - lobe).norm() < 1e-14);
}

TEST_CASE("radiance gradient examples") {
  std::mt19937_64 rng(10);
  GaussianPrimitive prim = random_prim(rng);
  const Vec3 d = random_dir(rng);
  const Rgb up(0.3, -0.7, 1.1);

  SceneConfig c;
  c.active_sh_degree = 1;
  c.active_sg_count = 2;
  const ParamVector g = radiance_gradients(prim, c, d, up);
  // Locked SH bands and lobes get nothing.
  CHECK(g.segment(layout::kSh + 3 * 4, 3 * 5).isZero());
  CHECK(g.segment(layout::kSgAmplitude + 6, 3 * 5).isZero());
  CHECK(g.segment(layout::kSgSharpness + 2, 5).isZero());
  CHECK(g.segment(layout::kSgAxis + 6, 15).isZero());
  CHECK(g.head(layout::kSh).isZero());
  // Linearity in SH coefficients.
  const auto y = sh_basis<double>(d);
  for (int k = 0; k < 4; ++k) {
    CHECK((g.segment<3>(layout::kSh + 3 * k) - up * y[k]).norm() < 1e-15);
  }
  // d = p: the sharpness gradient vanishes.
  prim.sg_axis_raw(0) = 2.5 * d;
  const ParamVector g2 = radiance_gradients(prim, c, d, up);
  CHECK(std::abs(g2[layout::kSgSharpness]) < 1e-15);
}

TEST_CASE("radiance gradients match central differences") {
  std::mt19937_64 rng(11);
  const SceneConfig c = unlocked();
  int failures = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    GaussianPrimitive prim = random_prim(rng);
    const Vec3 d = random_dir(rng);
    const Rgb up = Rgb::Random();
    const ParamVector g = radiance_gradients(prim, c, d, up);
    for (int k = layout::kSh; k < layout::kCount; ++k) {
      const double x = prim.raw[k];
      const double h = 1e-4;
      GaussianPrimitive a = prim, b = prim;
      a.raw[k] = x + h;
      b.raw[k] = x - h;
      const double fd = up.dot(eval_radiance(a, c, d) - eval_radiance(b, c, d)) / (2.0 * h);
      const double err = std::abs(fd - g[k]);
      if (err > 1e-4 * std::max(std::abs(fd), std::abs(g[k])) && err > 1e-9) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("radiance is continuous in its parameters") {
  std::mt19937_64 rng(12);
  const SceneConfig c = unlocked();
  for (int i = 0; i < 100; ++i) {
    GaussianPrimitive prim = random_prim(rng);
    const Vec3 d = random_dir(rng);
    const Rgb base = eval_radiance(prim, c, d);
    for (int k = layout::kSh; k < layout::kCount; ++k) {
      GaussianPrimitive q = prim;
      q.raw[k] += 1e-9;
      CHECK((eval_radiance(q, c, d) - base).norm() < 1e-7);
    }
  }
}
