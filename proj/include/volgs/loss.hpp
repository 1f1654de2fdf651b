#pragma once

#include "volgs/image.hpp"

namespace volgs {

inline constexpr double kDefaultSsimWeight = 0.2;
inline constexpr double kPsnrCap = 99.0;

double l1_loss(const Image& rendered, const Image& target);
double mse(const Image& a, const Image& b);

/// Mean SSIM over pixels and channels: 11x11 Gaussian window (sigma 1.5),
/// k1 = 0.01, k2 = 0.03, zero padding outside the image.
double ssim(const Image& a, const Image& b);

/// Per-pixel, per-channel SSIM values.
Image ssim_map(const Image& a, const Image& b);

/// (1 - lambda) L1 + lambda (1 - SSIM) / 2.
double loss(const Image& rendered, const Image& target, double lambda = kDefaultSsimWeight);

struct LossGradient {
  double value = 0.0;
  /// dL/d rendered.
  Image gradient;
};

LossGradient loss_with_gradient(const Image& rendered, const Image& target,
                                double lambda = kDefaultSsimWeight);

/// 10 log10(1 / MSE) on [0, 1] floats, capped at 99 dB.
double psnr(const Image& a, const Image& b);

}  // namespace volgs
