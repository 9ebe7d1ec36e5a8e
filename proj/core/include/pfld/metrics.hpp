#pragma once

#include "pfld/common.hpp"
#include "pfld/operators.hpp"

namespace pfld {

inline constexpr double kPsnrCapDb = 200.0;

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double l2_error = 0.0;
  double residual_sq = 0.0;
};

/// 10 log10(max^2 / MSE), capped at 200 dB once MSE < 1e-20.
double psnr(const Vector& reference, const Vector& estimate, double max_value);

/// Mean local SSIM with an 11-tap style Gaussian window (sigma 1.5) of the
/// given odd size, evaluated over valid window positions only. 1 x n inputs
/// use a 1D window. C1 = (0.01 max)^2, C2 = (0.03 max)^2.
double ssim(const Vector& reference, const Vector& estimate, ImageShape shape, int window, double max_value);

/// Largest odd window <= `preferred` that fits the image.
int fitted_ssim_window(ImageShape shape, int preferred);

MetricReport compute_metrics(const Vector& reference, const Vector& estimate, ImageShape shape, double max_value,
                             int ssim_window, double residual_sq);

}  // namespace pfld
