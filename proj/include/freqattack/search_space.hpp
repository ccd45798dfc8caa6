#pragma once

#include "freqattack/dct.hpp"

#include <optional>

namespace freqattack {

/// The coordinates a black-box attack searches over: either the top-left
/// s x s DCT coefficients of every n x n block, or raw pixels.
///
/// Flat vectors use the FreqPerturbation layout in DCT mode and the ImageSet
/// buffer layout in pixel mode.
class SearchSpace {
 public:
  /// Coefficients of the iterate being perturbed.
  struct Anchor {
    ImageSet image;
    BlockGrid coeffs;  // empty in pixel mode
  };

  static SearchSpace low_frequency(int views, int height, int width, int n, int s);
  static SearchSpace pixel(int views, int height, int width);

  bool uses_dct() const { return basis_.has_value(); }
  Eigen::Index dimension() const { return dimension_; }
  /// Coordinates per spatial block: 3 s^2 in DCT mode, 3 in pixel mode.
  Eigen::Index block_dimension() const;
  /// dimension() / block_dimension().
  Eigen::Index spatial_blocks() const { return dimension_ / block_dimension(); }
  int low_freq() const { return s_; }
  const DctBasis& basis() const { return *basis_; }

  Anchor anchor(const ImageSet& current) const;

  /// The anchor with `delta` added to its searched coordinates (not clamped).
  ImageSet perturb(const Anchor& anchor, const Eigen::VectorXd& delta) const;

  /// The pixel-space image of a coordinate vector: C^T pad(.) C per block in
  /// DCT mode, identity in pixel mode.
  ImageSet synthesize(const Eigen::VectorXd& params) const;

 private:
  SearchSpace(int views, int height, int width) : views_(views), height_(height), width_(width) {}

  int views_;
  int height_;
  int width_;
  int s_ = 0;
  Eigen::Index dimension_ = 0;
  std::optional<DctBasis> basis_;
  BlockGrid layout_;
};

}  // namespace freqattack
