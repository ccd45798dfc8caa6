#pragma once

#include "freqattack/image.hpp"

#include <optional>
#include <utility>

namespace freqattack {

enum class PerceptualKind {
  gradient_proxy,  // finite-difference gradient-field MSE
  none,
  external,  // scalar supplied by the caller, e.g. a remote LPIPS
};

struct LossConfig {
  double lambda = 0.05;
  PerceptualKind perceptual = PerceptualKind::gradient_proxy;
};

double mse(const ImageSet& a, const ImageSet& b);

/// Mean squared difference between the forward-difference fields of `a` and
/// `b`; the mean runs over all horizontal and vertical differences of every
/// view and channel. Zero iff a - b is constant per view and channel.
double perceptual_proxy(const ImageSet& a, const ImageSet& b);

/// mse(reference, rendered) + lambda * perceptual term. `external` is
/// required (and only used) when cfg.perceptual is external.
double adv_loss(const ImageSet& reference, const ImageSet& rendered, const LossConfig& cfg,
                std::optional<double> external = std::nullopt);

struct LossGradient {
  ImageSet reference;
  ImageSet rendered;
};

/// Partial derivatives of adv_loss with respect to both arguments. Throws
/// Unsupported for the external perceptual kind.
LossGradient adv_loss_grad(const ImageSet& reference, const ImageSet& rendered, const LossConfig& cfg);

}  // namespace freqattack
