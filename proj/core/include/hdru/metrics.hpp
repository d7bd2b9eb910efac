/**
 * metrics.hpp - image comparison scores (peak value 1)
 */
#pragma once

#include "hdru/image.hpp"

namespace hdru {

/// Peak signal-to-noise ratio in dB; +inf for identical images.
double psnr(const GrayImage& a, const GrayImage& b);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), replicate boundary,
/// K1 = 0.01, K2 = 0.03.
double ssim(const GrayImage& a, const GrayImage& b);

double max_abs_diff(const GrayImage& a, const GrayImage& b);
double mean_abs_diff(const GrayImage& a, const GrayImage& b);

}  // namespace hdru
