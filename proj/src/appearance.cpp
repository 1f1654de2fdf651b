#include "volgs/appearance.hpp"

#include <algorithm>

namespace volgs {

namespace {

int clamp_sh_degree(const SceneConfig& config) {
  return std::clamp(config.active_sh_degree, 0, kMaxShDegree);
}

int clamp_sg_count(const SceneConfig& config) {
  return std::clamp(config.active_sg_count, 0, kMaxSgCount);
}

}  // namespace

Rgb eval_radiance(const GaussianPrimitive& prim, const SceneConfig& config, const Vec3& d) {
  Rgb c = eval_sh(sh_coefficients(prim), clamp_sh_degree(config), d);
  const int lobes = clamp_sg_count(config);
  for (int j = 0; j < lobes; ++j) {
    c += prim.sg_amplitude(j) * sg_lobe(prim.sg_sharpness(j), prim.sg_axis(j), d);
  }
  return c;
}

void accumulate_radiance_gradients(const GaussianPrimitive& prim, const SceneConfig& config,
                                   const Vec3& d, const Rgb& upstream,
                                   Eigen::Ref<ParamVector> grad) {
  const auto y = sh_basis(d);
  const int n_sh = sh_coeff_count(clamp_sh_degree(config));
  for (int k = 0; k < n_sh; ++k) grad.segment<3>(layout::kSh + 3 * k) += upstream * y[k];

  const int lobes = clamp_sg_count(config);
  for (int j = 0; j < lobes; ++j) {
    const double sharp_raw = prim.sg_sharpness_raw(j);
    const double sharpness = softplus(sharp_raw);
    const Vec3 v = prim.sg_axis_raw(j);
    const double v_norm = v.norm();
    const Vec3 p = v / v_norm;
    const double cos_angle = d.dot(p);
    const double lobe = std::exp(sharpness * (cos_angle - 1.0));
    grad.segment<3>(layout::kSgAmplitude + 3 * j) += upstream * lobe;

    const double g_lobe = upstream.dot(prim.sg_amplitude(j));
    grad[layout::kSgSharpness + j] += g_lobe * lobe * (cos_angle - 1.0) * sigmoid(sharp_raw);
    const Vec3 g_p = g_lobe * lobe * sharpness * d;
    grad.segment<3>(layout::kSgAxis + 3 * j) += (g_p - p * p.dot(g_p)) / v_norm;
  }
}

ParamVector radiance_gradients(const GaussianPrimitive& prim, const SceneConfig& config,
                               const Vec3& d, const Rgb& upstream) {
  ParamVector g = ParamVector::Zero();
  accumulate_radiance_gradients(prim, config, d, upstream, g);
  return g;
}

}  // namespace volgs
