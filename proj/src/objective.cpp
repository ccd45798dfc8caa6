#include "freqattack/objective.hpp"

#include "freqattack/errors.hpp"

#include <utility>

namespace freqattack {
namespace {

Eigen::Index difference_count(const ImageSet& x) {
  const Eigen::Index h = x.height();
  const Eigen::Index w = x.width();
  return Eigen::Index{x.views()} * ImageSet::kChannels * (h * (w - 1) + (h - 1) * w);
}

void require_proxy_size(const ImageSet& x) {
  if (x.height() < 2 || x.width() < 2) throw ShapeMismatch("perceptual proxy needs images of at least 2x2");
}

}  // namespace

double mse(const ImageSet& a, const ImageSet& b) {
  require_same_shape(a, b, "mse");
  return (a.data() - b.data()).square().mean();
}

double perceptual_proxy(const ImageSet& a, const ImageSet& b) {
  require_same_shape(a, b, "perceptual_proxy");
  require_proxy_size(a);
  // The gradient fields are linear, so compare the fields of a - b.
  ImageSet d = a;
  d.data() -= b.data();
  double sum = 0.0;
  for (int v = 0; v < d.views(); ++v) {
    for (int c = 0; c < ImageSet::kChannels; ++c) {
      const ConstPlaneMap p = std::as_const(d).plane(v, c);
      const Eigen::Index h = p.rows();
      const Eigen::Index w = p.cols();
      sum += (p.rightCols(w - 1) - p.leftCols(w - 1)).squaredNorm();
      sum += (p.bottomRows(h - 1) - p.topRows(h - 1)).squaredNorm();
    }
  }
  return sum / static_cast<double>(difference_count(d));
}

double adv_loss(const ImageSet& reference, const ImageSet& rendered, const LossConfig& cfg,
                std::optional<double> external) {
  if (cfg.lambda < 0.0) throw ConfigError("lambda must be non-negative");
  const double base = mse(reference, rendered);
  switch (cfg.perceptual) {
    case PerceptualKind::none:
      return base;
    case PerceptualKind::gradient_proxy:
      return cfg.lambda == 0.0 ? base : base + cfg.lambda * perceptual_proxy(reference, rendered);
    case PerceptualKind::external:
      if (!external) throw ConfigError("external perceptual term requested but no value supplied");
      return base + cfg.lambda * *external;
  }
  return base;
}

LossGradient adv_loss_grad(const ImageSet& reference, const ImageSet& rendered, const LossConfig& cfg) {
  require_same_shape(reference, rendered, "adv_loss_grad");
  if (cfg.perceptual == PerceptualKind::external) {
    throw Unsupported("the external perceptual term has no analytic gradient");
  }
  ImageSet diff = reference;
  diff.data() -= rendered.data();

  ImageSet grad = diff;
  grad.data() *= 2.0 / static_cast<double>(diff.size());

  if (cfg.perceptual == PerceptualKind::gradient_proxy && cfg.lambda != 0.0) {
    require_proxy_size(diff);
    const double scale = cfg.lambda * 2.0 / static_cast<double>(difference_count(diff));
    for (int v = 0; v < diff.views(); ++v) {
      for (int c = 0; c < ImageSet::kChannels; ++c) {
        const ConstPlaneMap p = std::as_const(diff).plane(v, c);
        PlaneMap g = grad.plane(v, c);
        const Eigen::Index h = p.rows();
        const Eigen::Index w = p.cols();
        // Adjoint of the forward-difference operators.
        const Plane dx = p.rightCols(w - 1) - p.leftCols(w - 1);
        const Plane dy = p.bottomRows(h - 1) - p.topRows(h - 1);
        g.rightCols(w - 1) += scale * dx;
        g.leftCols(w - 1) -= scale * dx;
        g.bottomRows(h - 1) += scale * dy;
        g.topRows(h - 1) -= scale * dy;
      }
    }
  }

  ImageSet grad_rendered = grad;
  grad_rendered.data() = -grad.data();
  return {std::move(grad), std::move(grad_rendered)};
}

}  // namespace freqattack
