#include "volgs/adam.hpp"

#include <cmath>

#include "volgs/errors.hpp"

namespace volgs {

double ExponentialSchedule::at(std::int64_t iteration) const {
  if (steps <= 0 || iteration >= steps) return final;
  if (iteration <= 0) return initial;
  const double t = double(iteration) / double(steps);
  return std::exp((1.0 - t) * std::log(initial) + t * std::log(final));
}

double LearningRates::rate(ParamGroup group, std::int64_t iteration) const {
  switch (group) {
    case ParamGroup::position:
      return position.at(iteration) * position_scale;
    case ParamGroup::rotation:
      return rotation;
    case ParamGroup::scale:
      return scale;
    case ParamGroup::density:
      return density;
    case ParamGroup::sh_dc:
      return sh_dc;
    case ParamGroup::sh_rest:
      return sh_rest;
    case ParamGroup::sg_amplitude:
      return sg_amplitude;
    case ParamGroup::sg_sharpness:
      return sg_sharpness;
    case ParamGroup::sg_axis:
      return sg_axis;
  }
  return 0.0;
}

ParamVector LearningRates::per_parameter(std::int64_t iteration) const {
  ParamVector lr;
  for (int r = 0; r < layout::kCount; ++r) lr[r] = rate(param_group_of(r), iteration);
  return lr;
}

void AdamState::reset(std::size_t n) {
  step = 0;
  m = ParamMatrix::Zero(layout::kCount, Eigen::Index(n));
  v = ParamMatrix::Zero(layout::kCount, Eigen::Index(n));
}

void AdamState::reorder(const std::vector<std::size_t>& keep, std::size_t added) {
  ParamMatrix nm = ParamMatrix::Zero(layout::kCount, Eigen::Index(keep.size() + added));
  ParamMatrix nv = nm;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    nm.col(Eigen::Index(i)) = m.col(Eigen::Index(keep[i]));
    nv.col(Eigen::Index(i)) = v.col(Eigen::Index(keep[i]));
  }
  m = std::move(nm);
  v = std::move(nv);
}

void adam_update(Eigen::Ref<Eigen::ArrayXd> params, const Eigen::ArrayXd& grad,
                 Eigen::Ref<Eigen::ArrayXd> m, Eigen::Ref<Eigen::ArrayXd> v,
                 std::int64_t step, const Eigen::ArrayXd& lr, double beta1, double beta2,
                 double epsilon) {
  if (step < 1) throw ParameterError("adam: step counter starts at 1");
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.square();
  const double c1 = 1.0 - std::pow(beta1, double(step));
  const double c2 = 1.0 - std::pow(beta2, double(step));
  params -= lr * (m / c1) / ((v / c2).sqrt() + epsilon);
}

void adam_step(Scene& scene, const GradientBuffer& gradients, AdamState& state,
               const LearningRates& rates, std::int64_t iteration) {
  const std::size_t n = scene.size();
  if (gradients.size() != n || state.size() != n) {
    throw DimensionError("adam_step: scene, gradient and state sizes differ");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
  const ParamVector lr = rates.per_parameter(iteration);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index k = Eigen::Index(i);
    auto m = state.m.col(k);
    auto v = state.v.col(k);
    const auto g = gradients.grad.col(k);
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    scene.primitives[i].raw.array() -=
        lr.array() * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  }
}

}  // namespace volgs
