#include "pfld/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pfld {

namespace {

std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(size));
  const int r = size / 2;
  double total = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    taps[static_cast<std::size_t>(i + r)] = v;
    total += v;
  }
  for (double& v : taps) v /= total;
  return taps;
}

}  // namespace

double psnr(const Vector& reference, const Vector& estimate, double max_value) {
  require(reference.size() == estimate.size(), "psnr: dimension mismatch");
  require(reference.size() > 0, "psnr: empty input");
  require(std::isfinite(max_value) && max_value > 0.0, "psnr: max_value must be positive");
  const double mse = (reference - estimate).squaredNorm() / static_cast<double>(reference.size());
  if (mse < 1e-20) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(max_value * max_value / mse));
}

double ssim(const Vector& reference, const Vector& estimate, ImageShape shape, int window, double max_value) {
  require(reference.size() == estimate.size() && reference.size() == shape.size(), "ssim: dimension mismatch");
  require(window >= 1 && window % 2 == 1, "ssim: window must be odd and positive");
  require(max_value > 0.0, "ssim: max_value must be positive");
  const bool one_d = shape.height == 1;
  const int wy = one_d ? 1 : window;
  const int wx = window;
  require(shape.height >= wy && shape.width >= wx, "ssim: input smaller than the window");

  const auto taps = gaussian_taps(window, 1.5);
  const auto& ty = one_d ? std::vector<double>{1.0} : taps;
  const double c1 = std::pow(0.01 * max_value, 2);
  const double c2 = std::pow(0.03 * max_value, 2);

  double acc = 0.0;
  int count = 0;
  for (int r0 = 0; r0 + wy <= shape.height; ++r0) {
    for (int c0 = 0; c0 + wx <= shape.width; ++c0) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < wy; ++i) {
        for (int j = 0; j < wx; ++j) {
          const double w = ty[static_cast<std::size_t>(i)] * taps[static_cast<std::size_t>(j)];
          const auto idx = (r0 + i) * shape.width + (c0 + j);
          const double x = reference[idx];
          const double y = estimate[idx];
          mx += w * x;
          my += w * y;
          sxx += w * x * x;
          syy += w * y * y;
          sxy += w * x * y;
        }
      }
      const double vx = sxx - mx * mx;
      const double vy = syy - my * my;
      const double cxy = sxy - mx * my;
      acc += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return acc / count;
}

int fitted_ssim_window(ImageShape shape, int preferred) {
  int limit = shape.height == 1 ? shape.width : std::min(shape.height, shape.width);
  int w = std::min(preferred, limit);
  if (w % 2 == 0) --w;
  return std::max(w, 1);
}

MetricReport compute_metrics(const Vector& reference, const Vector& estimate, ImageShape shape, double max_value,
                             int ssim_window, double residual_sq) {
  MetricReport r;
  r.psnr = psnr(reference, estimate, max_value);
  r.ssim = ssim(reference, estimate, shape, fitted_ssim_window(shape, ssim_window), max_value);
  r.l2_error = (reference - estimate).norm();
  r.residual_sq = residual_sq;
  return r;
}

}  // namespace pfld
