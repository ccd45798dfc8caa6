#pragma once

#include "freqattack/victim.hpp"

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace freqattack {

/// render(x) = x.
class IdentityVictim final : public Victim {
 public:
  VictimCapabilities capabilities() const override { return {"identity", true, true, std::nullopt}; }

 protected:
  ImageSet do_render(const ImageSet& inputs) const override { return inputs; }
  ImageSet do_render_grad(const ImageSet&, const ImageSet& upstream) const override { return upstream; }
};

/// render(x) = 0.
class BlackVictim final : public Victim {
 public:
  VictimCapabilities capabilities() const override { return {"black", true, true, std::nullopt}; }

 protected:
  ImageSet do_render(const ImageSet& inputs) const override { return inputs.zeros_like(); }
  ImageSet do_render_grad(const ImageSet& inputs, const ImageSet&) const override { return inputs.zeros_like(); }
};

/// Separable 5-tap Gaussian blur (sigma 1, reflect-101 borders) per channel,
/// followed by a fixed 3x3 colour mix. Linear, so its VJP is the transposed
/// pipeline.
class BlurVictim final : public Victim {
 public:
  static constexpr int kRadius = 2;

  BlurVictim();

  VictimCapabilities capabilities() const override { return {"blur", true, true, std::nullopt}; }

  /// Normalised kernel taps, index 0 is offset -kRadius.
  const Eigen::Matrix<double, 2 * kRadius + 1, 1>& kernel() const { return kernel_; }
  /// out_channel = mix * in_channel; rows sum to one.
  const Eigen::Matrix3d& color_mix() const { return mix_; }

 protected:
  ImageSet do_render(const ImageSet& inputs) const override;
  ImageSet do_render_grad(const ImageSet& inputs, const ImageSet& upstream) const override;

 private:
  Eigen::Matrix<double, 2 * kRadius + 1, 1> kernel_;
  Eigen::Matrix3d mix_;
};

/// Reflect-101 index into [0, size): -1 -> 1, size -> size - 2.
int reflect_index(int i, int size);

/// 2x3 affine map from source pixel coordinates to view coordinates.
using ViewTransform = Eigen::Matrix<double, 2, 3>;

struct SplatPrimitive {
  Eigen::Vector2d position;
  double radius = 1.0;
  double opacity = 0.5;
  Eigen::Vector3d color;
  double depth_key = 0.0;
};

struct ToySplatOptions {
  double radius = 1.0;
  /// Primitives farther than cull_factor * radius from a pixel centre are
  /// skipped; infinity composites every primitive at every pixel.
  double cull_factor = 3.0;
};

/// One primitive per pixel of `image`'s view `view`: centred on the pixel
/// centre, opacity 0.05 + 0.9 logistic(4 (luma - 0.5)), depth key = luma.
std::vector<SplatPrimitive> splats_from_view(const ImageSet& image, int view, double radius);

/// Front-to-back alpha compositing of the primitives, moved by `transform`,
/// into an H x W x 3 image (written into view `out_view` of `out`). Ordering
/// is ascending depth key, ties by primitive index; effective opacity at a
/// pixel is opacity * exp(-d^2 / (2 r^2)); background is black.
void composite_splats(const std::vector<SplatPrimitive>& primitives, const ViewTransform& transform,
                      const ToySplatOptions& options, ImageSet& out, int out_view);

/// The default view transforms: identity for view 0, then for view k a 1.05^k
/// isotropic scale followed by a (2k, k) pixel translation.
std::vector<ViewTransform> default_view_transforms(int views);

/// Builds splat primitives from view 0 and re-renders every view through its
/// transform. Black-box only.
ImageSet toy_splat_render(const ImageSet& inputs, const std::vector<ViewTransform>& transforms,
                          const ToySplatOptions& options = {});

class ToySplatVictim final : public Victim {
 public:
  explicit ToySplatVictim(ToySplatOptions options = {}, std::vector<ViewTransform> transforms = {});

  VictimCapabilities capabilities() const override { return {"toysplat", false, true, std::nullopt}; }

 protected:
  ImageSet do_render(const ImageSet& inputs) const override;

 private:
  ToySplatOptions options_;
  std::vector<ViewTransform> transforms_;  // empty: default_view_transforms
};

}  // namespace freqattack
