#include "volgs/loss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "volgs/errors.hpp"

namespace volgs {

namespace {

constexpr int kRadius = 5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

using Plane = Eigen::ArrayXXd;  // rows = y, cols = x

const std::array<double, 2 * kRadius + 1>& window() {
  static const auto w = [] {
    std::array<double, 2 * kRadius + 1> k{};
    double sum = 0.0;
    for (int i = -kRadius; i <= kRadius; ++i) {
      k[i + kRadius] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
      sum += k[i + kRadius];
    }
    for (double& v : k) v /= sum;
    return k;
  }();
  return w;
}

// Zero-padded separable Gaussian filter. The kernel is symmetric, so this
// operator is its own adjoint.
Plane blur(const Plane& in) {
  const auto& k = window();
  const Eigen::Index h = in.rows();
  const Eigen::Index w = in.cols();
  Plane tmp = Plane::Zero(h, w);
  for (Eigen::Index x = 0; x < w; ++x) {
    for (int o = -kRadius; o <= kRadius; ++o) {
      const Eigen::Index xs = x + o;
      if (xs < 0 || xs >= w) continue;
      tmp.col(x) += k[o + kRadius] * in.col(xs);
    }
  }
  Plane out = Plane::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (int o = -kRadius; o <= kRadius; ++o) {
      const Eigen::Index ys = y + o;
      if (ys < 0 || ys >= h) continue;
      out.row(y) += k[o + kRadius] * tmp.row(ys);
    }
  }
  return out;
}

Plane channel(const Image& img, int c) {
  Plane p(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) p(y, x) = img.pixels(c, img.index(x, y));
  }
  return p;
}

void store(Image& img, int c, const Plane& p) {
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) img.pixels(c, img.index(x, y)) = p(y, x);
  }
}

struct SsimTerms {
  Plane mu_x, mu_y, a1, a2, b1, b2, s;
};

SsimTerms ssim_terms(const Plane& x, const Plane& y) {
  SsimTerms t;
  t.mu_x = blur(x);
  t.mu_y = blur(y);
  const Plane sxx = blur(x * x) - t.mu_x.square();
  const Plane syy = blur(y * y) - t.mu_y.square();
  const Plane sxy = blur(x * y) - t.mu_x * t.mu_y;
  t.a1 = 2.0 * t.mu_x * t.mu_y + kC1;
  t.a2 = 2.0 * sxy + kC2;
  t.b1 = t.mu_x.square() + t.mu_y.square() + kC1;
  t.b2 = sxx + syy + kC2;
  t.s = (t.a1 * t.a2) / (t.b1 * t.b2);
  return t;
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b) || a.pixels.cols() != b.pixels.cols()) {
    throw DimensionError(std::string(what) + ": image dimensions differ");
  }
  if (a.num_pixels() == 0) throw DimensionError(std::string(what) + ": empty image");
}

}  // namespace

double l1_loss(const Image& rendered, const Image& target) {
  require_same_shape(rendered, target, "l1_loss");
  return (rendered.pixels - target.pixels).abs().mean();
}

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  return (a.pixels - b.pixels).square().mean();
}

Image ssim_map(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  Image out(a.width, a.height);
  for (int c = 0; c < 3; ++c) store(out, c, ssim_terms(channel(a, c), channel(b, c)).s);
  return out;
}

double ssim(const Image& a, const Image& b) { return ssim_map(a, b).pixels.mean(); }

double loss(const Image& rendered, const Image& target, double lambda) {
  const double l1 = l1_loss(rendered, target);
  if (lambda == 0.0) return l1;
  return (1.0 - lambda) * l1 + lambda * 0.5 * (1.0 - ssim(rendered, target));
}

LossGradient loss_with_gradient(const Image& rendered, const Image& target, double lambda) {
  require_same_shape(rendered, target, "loss");
  LossGradient out;
  out.gradient = Image(rendered.width, rendered.height);
  const double count = 3.0 * double(rendered.num_pixels());
  const Eigen::Array3Xd diff = rendered.pixels - target.pixels;
  out.value = (1.0 - lambda) * diff.abs().mean();
  out.gradient.pixels = ((1.0 - lambda) / count) * diff.sign();
  if (lambda == 0.0) return out;

  double ssim_sum = 0.0;
  // d(lambda (1 - mean S) / 2) / dS at every pixel.
  const double g_s = -0.5 * lambda / count;
  for (int c = 0; c < 3; ++c) {
    const Plane x = channel(rendered, c);
    const Plane y = channel(target, c);
    const SsimTerms t = ssim_terms(x, y);
    ssim_sum += t.s.sum();
    const Plane denom = t.b1 * t.b2;
    const Plane d_mu = 2.0 * t.mu_y * (t.a2 - t.a1) / denom - 2.0 * t.mu_x * t.s * (1.0 / t.b1 - 1.0 / t.b2);
    const Plane d_mxx = -t.s / t.b2;
    const Plane d_mxy = 2.0 * t.a1 / denom;
    const Plane grad = g_s * (blur(d_mu) + 2.0 * x * blur(d_mxx) + y * blur(d_mxy));
    Plane current = channel(out.gradient, c);
    store(out.gradient, c, current + grad);
  }
  out.value += lambda * 0.5 * (1.0 - ssim_sum / count);
  return out;
}

double psnr(const Image& a, const Image& b) {
  const double m = mse(a, b);
  if (m <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

}  // namespace volgs
