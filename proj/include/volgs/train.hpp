#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volgs/adam.hpp"
#include "volgs/densify.hpp"
#include "volgs/loss.hpp"

namespace volgs {

struct TrainView {
  Camera camera;
  Image image;
};

struct UnlockSchedule {
  /// Every `interval` iterations the SH degree grows by one; after degree 2
  /// the spherical Gaussians are enabled.
  std::int64_t interval = 1000;
  int max_sh_degree = kMaxShDegree;
  int max_sg_count = kMaxSgCount;

  int sh_degree_at(std::int64_t iteration) const;
  int sg_count_at(std::int64_t iteration) const;
};

struct DensifySchedule {
  bool enabled = true;
  std::int64_t from = 500;
  std::int64_t until = 15000;
  std::int64_t interval = 500;
  DensifyOptions options;

  bool due(std::int64_t completed_iterations) const;
};

struct TrainConfig {
  std::int64_t iterations = 30000;
  std::uint64_t seed = 0;
  double ssim_weight = kDefaultSsimWeight;
  RenderConfig render;
  LearningRates rates;
  UnlockSchedule unlock;
  DensifySchedule densify;
  /// Held-out PSNR every this many iterations (and after the last one); 0
  /// evaluates only after the last iteration.
  std::int64_t eval_interval = 0;
  int bvh_leaf_size = 4;

  void validate() const;
};

struct MetricRow {
  std::int64_t iteration = 0;
  double loss = 0.0;
  std::optional<double> psnr;
  std::size_t primitives = 0;
  std::uint64_t overflows = 0;
};

struct TrainResult {
  Scene scene;
  std::vector<MetricRow> log;
};

using TrainProgress = std::function<void(const MetricRow&)>;

/// Optimizes `scene` against the training views. One view per iteration,
/// drawn without replacement within each epoch from a generator seeded with
/// config.seed. Throws NumericError when the loss becomes non-finite.
TrainResult train(Scene scene, std::span<const TrainView> train_views,
                  std::span<const TrainView> test_views, const TrainConfig& config,
                  const TrainProgress& progress = {});

/// Mean PSNR of the scene over `views`.
double mean_psnr(const Scene& scene, std::span<const TrainView> views, const RenderConfig& config,
                 int bvh_leaf_size = 4);

/// Header "iteration,loss,psnr,n_primitives,overflow_count"; the psnr cell is
/// empty on rows without an evaluation.
std::string metrics_csv(const std::vector<MetricRow>& log);

}  // namespace volgs
