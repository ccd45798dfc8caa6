#include "freqattack/search_space.hpp"

#include "freqattack/errors.hpp"

#include <string>

namespace freqattack {

SearchSpace SearchSpace::low_frequency(int views, int height, int width, int n, int s) {
  if (s < 1 || s > n) {
    throw DimensionError("low-frequency side " + std::to_string(s) + " must lie in [1, " + std::to_string(n) + "]");
  }
  SearchSpace space(views, height, width);
  space.layout_ = partition_blocks(ImageSet(views, height, width), n);
  space.basis_.emplace(n);
  space.s_ = s;
  space.dimension_ = static_cast<Eigen::Index>(space.layout_.size()) * s * s;
  return space;
}

SearchSpace SearchSpace::pixel(int views, int height, int width) {
  SearchSpace space(views, height, width);
  space.dimension_ = Eigen::Index{views} * height * width * ImageSet::kChannels;
  return space;
}

Eigen::Index SearchSpace::block_dimension() const {
  return uses_dct() ? Eigen::Index{ImageSet::kChannels} * s_ * s_ : Eigen::Index{ImageSet::kChannels};
}

SearchSpace::Anchor SearchSpace::anchor(const ImageSet& current) const {
  if (current.views() != views_ || current.height() != height_ || current.width() != width_) {
    throw ShapeMismatch("image does not match the search space geometry");
  }
  Anchor a{current, {}};
  if (uses_dct()) a.coeffs = block_dct(partition_blocks(current, basis_->n()), *basis_);
  return a;
}

ImageSet SearchSpace::perturb(const Anchor& anchor, const Eigen::VectorXd& delta) const {
  if (delta.size() != dimension_) throw DimensionError("perturbation length does not match the search space");
  if (!uses_dct()) {
    ImageSet out = anchor.image;
    out.data() += delta.array();
    return out;
  }
  return assemble_blocks(perturbed_idct(anchor.coeffs, FreqPerturbation::from_flat(delta, s_), *basis_));
}

ImageSet SearchSpace::synthesize(const Eigen::VectorXd& params) const {
  if (params.size() != dimension_) throw DimensionError("parameter length does not match the search space");
  if (!uses_dct()) {
    ImageSet out(views_, height_, width_);
    out.data() = params.array();
    return out;
  }
  return assemble_blocks(freq_grad_to_spatial(FreqPerturbation::from_flat(params, s_), *basis_, layout_));
}

}  // namespace freqattack
