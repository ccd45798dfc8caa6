#pragma once

#include "freqattack/image.hpp"

#include <limits>

namespace freqattack {

struct QualityScores {
  double psnr = std::numeric_limits<double>::infinity();
  double ssim = 1.0;
};

/// 10 log10(1 / MSE) with unit peak over every view, pixel and channel.
/// Identical inputs give +infinity.
double psnr(const ImageSet& a, const ImageSet& b);

/// Gaussian-window parameters of the single-scale SSIM.
struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

/// Mean local SSIM of the luma planes (valid window positions only),
/// averaged over views. Throws WindowError if a view is smaller than the
/// window.
double ssim(const ImageSet& a, const ImageSet& b, const SsimOptions& options = {});

QualityScores quality(const ImageSet& a, const ImageSet& b);

}  // namespace freqattack
