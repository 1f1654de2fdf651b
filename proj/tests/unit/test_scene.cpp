#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>

#include "doctest.h"
#include "volgs/appearance.hpp"
#include "volgs/geometry.hpp"
#include "volgs/scene.hpp"

using namespace volgs;

namespace {

Eigen::Vector4d z_quarter_turn() {
  const double h = std::numbers::pi / 4.0;
  return {std::cos(h), 0.0, 0.0, std::sin(h)};
}

Eigen::Vector4d random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Eigen::Vector4d(n(rng), n(rng), n(rng), n(rng)).normalized();
}

}  // namespace

TEST_CASE("covariance of identity rotation and unit scale is the identity") {
  const auto c = covariance_from<double>(Eigen::Vector4d(1, 0, 0, 0), Vec3(1, 1, 1));
  CHECK((c.sigma - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((c.inverse - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("covariance squares axis-aligned scales") {
  const auto c = covariance_from<double>(Eigen::Vector4d(1, 0, 0, 0), Vec3(2, 1, 1));
  CHECK((c.sigma - Vec3(4, 1, 1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("quarter turn about z swaps the x and y variances") {
  const auto c = covariance_from<double>(z_quarter_turn(), Vec3(2, 1, 1));
  // R S S^T R^T multiplied out by hand.
  Mat3 r;
  r << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Mat3 expected = r * Vec3(4, 1, 1).asDiagonal() * r.transpose();
  CHECK((c.sigma - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((c.sigma - Vec3(1, 4, 1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("covariance errors") {
  CHECK_THROWS_AS(covariance_from<double>(Eigen::Vector4d::Zero(), Vec3(1, 1, 1)),
                  DegenerateRotationError);
  CHECK_THROWS_AS(covariance_from<double>(Eigen::Vector4d(NAN, 0, 0, 0), Vec3(1, 1, 1)),
                  ParameterError);
  CHECK_THROWS_AS(covariance_from<double>(Eigen::Vector4d(1, 0, 0, 0), Vec3(1, INFINITY, 1)),
                  ParameterError);
  CHECK_THROWS_AS(covariance_from<double>(Eigen::Vector4d(1, 0, 0, 0), Vec3(1, 0, 1)),
                  ParameterError);
}

TEST_CASE("covariance is symmetric positive definite with an accurate inverse") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> logs(std::log(1e-4), std::log(1e3));
  for (int i = 0; i < 500; ++i) {
    const Vec3 s(std::exp(logs(rng)), std::exp(logs(rng)), std::exp(logs(rng)));
    const auto c = covariance_from<double>(random_quat(rng), s);
    CHECK((c.sigma - c.sigma.transpose()).cwiseAbs().maxCoeff() < 1e-12 * c.sigma.cwiseAbs().maxCoeff());
    CHECK(Eigen::LLT<Mat3>(c.sigma).info() == Eigen::Success);
    // Well-conditioned draws get the stated residual bound.
    if (s.maxCoeff() / s.minCoeff() < 10.0) {
      CHECK((c.sigma * c.inverse - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("mahalanobis examples") {
  GaussianPrimitive p;
  p.quat() = Eigen::Vector4d(1, 0, 0, 0);
  p.mu() = Vec3(0.5, -1, 2);
  CHECK(mahalanobis(p.mu(), p) == 0.0);
  CHECK(mahalanobis(Vec3(p.mu() + Vec3(3, 4, 0)), p) == doctest::Approx(5.0).epsilon(1e-14));
  p.scale_raw() = Vec3(std::log(2.0), 0, 0);
  CHECK(mahalanobis(Vec3(p.mu() + Vec3(2, 0, 0)), p) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mahalanobis is invariant under a joint rotation") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    GaussianPrimitive p;
    p.mu() = Vec3(n(rng), n(rng), n(rng));
    p.quat() = random_quat(rng);
    p.scale_raw() = 0.5 * Vec3(n(rng), n(rng), n(rng));
    const Vec3 x = p.mu() + Vec3(n(rng), n(rng), n(rng));
    const Eigen::Quaterniond g(Eigen::Vector4d(random_quat(rng)));
    GaussianPrimitive q = p;
    const Eigen::Quaterniond pq(p.quat()[0], p.quat()[1], p.quat()[2], p.quat()[3]);
    const Eigen::Quaterniond rotated = g * pq;
    q.quat() = Eigen::Vector4d(rotated.w(), rotated.x(), rotated.y(), rotated.z());
    const Vec3 xr = p.mu() + g.toRotationMatrix() * (x - p.mu());
    CHECK(std::abs(mahalanobis(x, p) - mahalanobis(xr, q)) < 1e-9);
  }
}

TEST_CASE("activations stay positive for any raw value") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    GaussianPrimitive p;
    p.density_raw() = u(rng);
    p.scale_raw() = Vec3(u(rng), u(rng), u(rng)) * 0.2;
    p.sg_sharpness_raw(0) = u(rng);
    p.sg_axis_raw(0) = Vec3(u(rng), u(rng), u(rng));
    CHECK(p.density() > 0.0);
    CHECK((p.scale().array() > 0.0).all());
    CHECK(p.sg_sharpness(0) > 0.0);
    CHECK(std::abs(p.sg_axis(0).norm() - 1.0) < 1e-6);
  }
  CHECK(softplus_inverse(softplus(0.7)) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(softplus_inverse(softplus(40.0)) == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("scene config validation") {
  SceneConfig c;
  CHECK_NOTHROW(c.validate());
  c.sigma_eps = 0.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.active_sh_degree = 3;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.active_sg_count = 8;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.background = Rgb(1.2, 0, 0);
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("init on a unit tetrahedron gives unit scales") {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<PointSample> pts = {
      {Vec3(1, 1, 1) * s / 2, Rgb(1, 0, 0)},
      {Vec3(1, -1, -1) * s / 2, Rgb(0, 1, 0)},
      {Vec3(-1, 1, -1) * s / 2, Rgb(0, 0, 1)},
      {Vec3(-1, -1, 1) * s / 2, Rgb(1, 1, 1)},
  };
  const Scene scene = init_from_point_cloud(pts, SceneConfig{});
  REQUIRE(scene.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const GaussianPrimitive& p = scene.primitives[i];
    CHECK((p.scale() - Vec3::Ones()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((p.mu() - pts[i].position).norm() == 0.0);
    CHECK((p.quat() - Eigen::Vector4d(1, 0, 0, 0)).norm() == 0.0);
    CHECK(p.density() == doctest::Approx(0.5).epsilon(1e-12));
    // Higher SH bands and lobe amplitudes start dark; lobe axes only need a direction.
    CHECK(p.raw.segment(layout::kSh + 3, layout::kSgSharpness - layout::kSh - 3).isZero());
    for (int j = 0; j < kMaxSgCount; ++j) CHECK(p.sg_axis_raw(j).norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("init inverts band-0 SH to reproduce point colors") {
  std::vector<PointSample> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({Vec3(i, i * i, 0.5 * i), Rgb(1, 1, 1)});
  pts[2].color = Rgb(0.2, 0.4, 0.6);
  const Scene scene = init_from_point_cloud(pts, SceneConfig{});
  const double y00 = 1.0 / (2.0 * std::sqrt(std::numbers::pi));
  CHECK((scene.primitives[0].sh(0) - Rgb::Constant(1.0 / y00)).norm() < 1e-12);
  const Rgb c = eval_radiance(scene.primitives[2], scene.config, Vec3(0, 0.6, 0.8));
  CHECK((c - pts[2].color).norm() < 1e-12);
}

TEST_CASE("init tolerates near-duplicate points") {
  std::vector<PointSample> pts;
  for (int i = 0; i < 6; ++i) pts.push_back({Vec3(0.3, 0.3, 0.3) + Vec3::Constant(1e-9 * i), Rgb(0.5, 0.5, 0.5)});
  const Scene scene = init_from_point_cloud(pts, SceneConfig{});
  for (const auto& p : scene.primitives) {
    CHECK(p.scale().allFinite());
    CHECK(p.scale().maxCoeff() < 1e-8);
    CHECK(p.scale().minCoeff() > 0.0);
  }
}

TEST_CASE("init errors") {
  std::vector<PointSample> pts(3, {Vec3::Zero(), Rgb::Zero()});
  CHECK_THROWS_AS(init_from_point_cloud(pts, SceneConfig{}), InitializationError);
  pts.resize(4, {Vec3(1, 2, 3), Rgb::Zero()});
  pts[1].position.x() = NAN;
  CHECK_THROWS(init_from_point_cloud(pts, SceneConfig{}));
}

TEST_CASE("isotropic mode ignores rotation and uses the first scale") {
  GaussianPrimitive p;
  p.quat() = z_quarter_turn();
  p.scale_raw() = Vec3(std::log(2.0), 5.0, -5.0);
  BasisConfig iso;
  iso.isotropic = true;
  CHECK(mahalanobis(Vec3(0, 0, 2), p, iso) == doctest::Approx(1.0));
  CHECK(mahalanobis(Vec3(2, 0, 0), p, iso) == doctest::Approx(1.0));
  CHECK(effective_rotation(p, iso).isIdentity());
}

TEST_CASE("parameter layout") {
  CHECK(layout::kCount == 87);
  CHECK(param_group_of(layout::kMu) == ParamGroup::position);
  CHECK(param_group_of(layout::kQuat + 3) == ParamGroup::rotation);
  CHECK(param_group_of(layout::kSh + 2) == ParamGroup::sh_dc);
  CHECK(param_group_of(layout::kSh + 3) == ParamGroup::sh_rest);
  CHECK(param_group_of(layout::kSgAxis + 20) == ParamGroup::sg_axis);
  Scene s;
  s.primitives.resize(2);
  s.primitives[1].raw[40] = NAN;
  CHECK_THROWS_AS(check_finite(s), ParameterError);
}
