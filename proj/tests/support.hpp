#pragma once

#include "freqattack/blocks.hpp"
#include "freqattack/dct.hpp"
#include "freqattack/image.hpp"
#include "freqattack/search_space.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace freqattack::testing {

inline ImageSet random_image(int views, int height, int width, std::uint64_t seed, double lo = 0.0,
                             double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ImageSet out(views, height, width);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = dist(gen);
  return out;
}

/// Smooth synthetic scene: a few random low-frequency cosines per channel,
/// squashed into [0.1, 0.9]. Every view is the same scene moved by the
/// toy splat's default view transform so the clean self-render is consistent.
inline ImageSet smooth_scene(int views, int height, int width, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> freq(0.5, 2.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(0.2, 0.6);
  struct Wave {
    double fx, fy, ph, a;
  };
  Wave waves[3][3];
  for (auto& channel : waves) {
    for (auto& w : channel) w = {freq(gen), freq(gen), phase(gen), amp(gen)};
  }
  ImageSet out(views, height, width);
  for (int v = 0; v < views; ++v) {
    const double scale = std::pow(1.05, v);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        // Source coordinates of this view pixel under x' = scale x + (2v, v).
        const double x = ((c + 0.5) - 2.0 * v) / scale / width;
        const double y = ((r + 0.5) - 1.0 * v) / scale / height;
        for (int ch = 0; ch < 3; ++ch) {
          double acc = 0.0;
          for (const Wave& w : waves[ch]) acc += w.a * std::cos(2.0 * std::numbers::pi * (w.fx * x + w.fy * y) + w.ph);
          out(v, r, c, ch) = 0.5 + 0.4 * std::tanh(acc);
        }
      }
    }
  }
  return out;
}

/// Central finite-difference gradient of f at x.
inline ImageSet finite_difference(const std::function<double(const ImageSet&)>& f, const ImageSet& x, double h = 1e-6) {
  ImageSet grad = x.zeros_like();
  ImageSet probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = probe.data()[i];
    probe.data()[i] = saved + h;
    const double up = f(probe);
    probe.data()[i] = saved - h;
    const double down = f(probe);
    probe.data()[i] = saved;
    grad.data()[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// ||a - b|| / max(||a||, ||b||, floor).
inline double relative_error(const ImageSet& a, const ImageSet& b, double floor = 1e-12) {
  const double scale = std::max({a.data().matrix().norm(), b.data().matrix().norm(), floor});
  return (a.data() - b.data()).matrix().norm() / scale;
}

inline double cosine(const ImageSet& a, const ImageSet& b) {
  return a.data().matrix().dot(b.data().matrix()) / (a.data().matrix().norm() * b.data().matrix().norm());
}

/// Orthogonal projection of a pixel-space image onto the span of a
/// low-frequency search space.
inline ImageSet project_low_freq(const SearchSpace& space, const ImageSet& g) {
  const int n = space.basis().n();
  return space.synthesize(low_freq_part(block_dct(partition_blocks(g, n), space.basis()), space.low_freq()).flat());
}

}  // namespace freqattack::testing
