#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "volgs/backward.hpp"

namespace volgs {

/// Exponential interpolation from `initial` to `final` over `steps` iterations,
/// constant afterwards.
struct ExponentialSchedule {
  double initial = 1.5e-5;
  double final = 2.5e-6;
  std::int64_t steps = 30000;

  double at(std::int64_t iteration) const;
};

struct LearningRates {
  ExponentialSchedule position;
  /// Multiplies the position schedule (scene-size normalization).
  double position_scale = 1.0;
  double rotation = 3e-4;
  double scale = 1.2e-2;
  double density = 1.5e-1;
  double sh_dc = 1.3e-3;
  double sh_rest = 1.1e-4;
  double sg_amplitude = 6e-4;
  double sg_sharpness = 1e-1;
  double sg_axis = 2e-3;

  double rate(ParamGroup group, std::int64_t iteration) const;
  /// Per-row learning rates for one primitive's parameter vector.
  ParamVector per_parameter(std::int64_t iteration) const;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  ParamMatrix m;
  ParamMatrix v;

  void reset(std::size_t n);
  std::size_t size() const { return static_cast<std::size_t>(m.cols()); }
  /// Keeps the columns in `keep` (in that order) and appends `added` zeroed ones.
  void reorder(const std::vector<std::size_t>& keep, std::size_t added);
};

/// One bias-corrected Adam update of every raw parameter, in place.
/// `iteration` selects the scheduled position rate.
void adam_step(Scene& scene, const GradientBuffer& gradients, AdamState& state,
               const LearningRates& rates, std::int64_t iteration);

/// Single-array form used by the scalar checks.
void adam_update(Eigen::Ref<Eigen::ArrayXd> params, const Eigen::ArrayXd& grad,
                 Eigen::Ref<Eigen::ArrayXd> m, Eigen::Ref<Eigen::ArrayXd> v,
                 std::int64_t step, const Eigen::ArrayXd& lr, double beta1 = 0.9,
                 double beta2 = 0.999, double epsilon = 1e-8);

}  // namespace volgs
