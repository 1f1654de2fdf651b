#include "volgs/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "volgs/errors.hpp"

namespace volgs {

int UnlockSchedule::sh_degree_at(std::int64_t iteration) const {
  const int cap = std::clamp(max_sh_degree, 0, kMaxShDegree);
  if (interval <= 0) return cap;
  return int(std::min<std::int64_t>(iteration / interval, cap));
}

int UnlockSchedule::sg_count_at(std::int64_t iteration) const {
  const int cap = std::clamp(max_sg_count, 0, kMaxSgCount);
  if (interval <= 0) return cap;
  return iteration / interval > kMaxShDegree ? cap : 0;
}

bool DensifySchedule::due(std::int64_t completed) const {
  return enabled && interval > 0 && completed >= from && completed <= until &&
         completed % interval == 0;
}

void TrainConfig::validate() const {
  if (iterations < 0) throw ParameterError("train: iterations must be >= 0");
  if (!(ssim_weight >= 0.0 && ssim_weight <= 1.0)) {
    throw ParameterError("train: ssim_weight must lie in [0, 1]");
  }
  if (eval_interval < 0) throw ParameterError("train: eval_interval must be >= 0");
  if (bvh_leaf_size < 1) throw ParameterError("train: bvh_leaf_size must be >= 1");
  render.validate();
}

double mean_psnr(const Scene& scene, std::span<const TrainView> views, const RenderConfig& config,
                 int bvh_leaf_size) {
  if (views.empty()) return 0.0;
  const EllipsoidBvh bvh = build_bvh(scene, bvh_leaf_size);
  double sum = 0.0;
  for (const TrainView& v : views) {
    sum += psnr(render_image(v.camera, scene, bvh, config), v.image);
  }
  return sum / double(views.size());
}

TrainResult train(Scene scene, std::span<const TrainView> train_views,
                  std::span<const TrainView> test_views, const TrainConfig& config,
                  const TrainProgress& progress) {
  config.validate();
  scene.config.validate();
  TrainResult result;
  if (config.iterations == 0) {
    result.scene = std::move(scene);
    return result;
  }
  if (train_views.empty()) throw ParameterError("train: no training views");
  for (const TrainView& v : train_views) {
    if (v.image.width != v.camera.width || v.image.height != v.camera.height) {
      throw DimensionError("train: image size does not match its camera");
    }
  }

  std::mt19937_64 rng(config.seed);
  const int rpp = config.render.rays_per_pixel;
  std::vector<RayBatch> rays;
  rays.reserve(train_views.size());
  for (const TrainView& v : train_views) rays.push_back(generate_rays(v.camera, rpp));

  AdamState adam;
  adam.reset(scene.size());
  DensificationStats stats;
  stats.reset(scene.size());
  std::vector<std::size_t> order(train_views.size());
  std::size_t cursor = order.size();

  for (std::int64_t it = 0; it < config.iterations; ++it) {
    scene.config.active_sh_degree = config.unlock.sh_degree_at(it);
    scene.config.active_sg_count = config.unlock.sg_count_at(it);
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::size_t view = order[cursor++];
    const TrainView& tv = train_views[view];

    const EllipsoidBvh bvh = build_bvh(scene, config.bvh_leaf_size);
    const RenderResult fwd = render(rays[view], scene, bvh, config.render);
    const Image image = image_from_rays(fwd.color, tv.camera.width, tv.camera.height, rpp);
    const LossGradient lg = loss_with_gradient(image, tv.image, config.ssim_weight);
    if (!std::isfinite(lg.value)) {
      throw NumericError("train: loss became non-finite at iteration " + std::to_string(it));
    }
    const GradientBuffer grads = backward(rays[view], scene, bvh, config.render,
                                          ray_gradients_from_image(lg.gradient, rpp), &fwd);
    if (config.densify.enabled && it < config.densify.until) stats.accumulate(grads);
    adam_step(scene, grads, adam, config.rates, it);

    const std::int64_t done = it + 1;
    if (config.densify.due(done)) {
      adaptive_control(scene, stats, adam, config.densify.options, rng);
      stats.reset(scene.size());
    }

    MetricRow row;
    row.iteration = done;
    row.loss = lg.value;
    row.primitives = scene.size();
    row.overflows = fwd.stats.overflows;
    const bool last = done == config.iterations;
    if (!test_views.empty() &&
        (last || (config.eval_interval > 0 && done % config.eval_interval == 0))) {
      row.psnr = mean_psnr(scene, test_views, config.render, config.bvh_leaf_size);
    }
    result.log.push_back(row);
    if (progress) progress(row);
  }
  result.scene = std::move(scene);
  return result;
}

std::string metrics_csv(const std::vector<MetricRow>& log) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,loss,psnr,n_primitives,overflow_count\n";
  for (const MetricRow& r : log) {
    out << r.iteration << ',' << r.loss << ',';
    if (r.psnr) out << *r.psnr;
    out << ',' << r.primitives << ',' << r.overflows << '\n';
  }
  return out.str();
}

}  // namespace volgs
