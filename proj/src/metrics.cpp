#include "freqattack/metrics.hpp"

#include "freqattack/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace freqattack {
namespace {

// "Valid" separable filtering: output is (H - k + 1) x (W - k + 1).
Plane filter_valid(const Plane& x, const Eigen::VectorXd& taps) {
  const Eigen::Index k = taps.size();
  const Eigen::Index out_rows = x.rows() - k + 1;
  const Eigen::Index out_cols = x.cols() - k + 1;
  Plane horizontal(x.rows(), out_cols);
  for (Eigen::Index c = 0; c < out_cols; ++c) horizontal.col(c) = x.middleCols(c, k) * taps;
  Plane out(out_rows, out_cols);
  for (Eigen::Index r = 0; r < out_rows; ++r) out.row(r) = taps.transpose() * horizontal.middleRows(r, k);
  return out;
}

Eigen::VectorXd gaussian_window(int size, double sigma) {
  Eigen::VectorXd w(size);
  const double center = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) w[i] = std::exp(-(i - center) * (i - center) / (2.0 * sigma * sigma));
  return w / w.sum();
}

}  // namespace

double psnr(const ImageSet& a, const ImageSet& b) {
  require_same_shape(a, b, "psnr");
  const double mse = (a.data() - b.data()).square().mean();
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ImageSet& a, const ImageSet& b, const SsimOptions& options) {
  require_same_shape(a, b, "ssim");
  if (a.height() < options.window || a.width() < options.window) {
    throw WindowError("ssim needs images of at least " + std::to_string(options.window) + "x" +
                      std::to_string(options.window) + " pixels");
  }
  const Eigen::VectorXd taps = gaussian_window(options.window, options.sigma);
  double total = 0.0;
  for (int v = 0; v < a.views(); ++v) {
    const Plane x = luminance(a, v);
    const Plane y = luminance(b, v);
    const Plane mu_x = filter_valid(x, taps);
    const Plane mu_y = filter_valid(y, taps);
    const Plane xx = filter_valid(x.cwiseProduct(x), taps);
    const Plane yy = filter_valid(y.cwiseProduct(y), taps);
    const Plane xy = filter_valid(x.cwiseProduct(y), taps);

    const auto mx = mu_x.array();
    const auto my = mu_y.array();
    const Eigen::ArrayXXd var_x = xx.array() - mx.square();
    const Eigen::ArrayXXd var_y = yy.array() - my.square();
    const Eigen::ArrayXXd cov = xy.array() - mx * my;
    const Eigen::ArrayXXd map = ((2.0 * mx * my + options.c1) * (2.0 * cov + options.c2)) /
                                ((mx.square() + my.square() + options.c1) * (var_x + var_y + options.c2));
    total += map.mean();
  }
  return total / a.views();
}

QualityScores quality(const ImageSet& a, const ImageSet& b) { return {psnr(a, b), ssim(a, b)}; }

}  // namespace freqattack
