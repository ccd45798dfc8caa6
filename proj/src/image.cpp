#include "freqattack/image.hpp"

#include "freqattack/errors.hpp"

#include <string>

namespace freqattack {

ImageSet::ImageSet(int views, int height, int width, double fill)
    : views_(views), height_(height), width_(width) {
  if (views < 1 || height < 1 || width < 1) {
    throw ShapeMismatch("image set needs at least one view and positive height and width");
  }
  data_ = Eigen::ArrayXd::Constant(Eigen::Index{views} * height * width * kChannels, fill);
}

PlaneMap ImageSet::plane(int view, int channel) {
  return PlaneMap(data_.data() + index(view, 0, 0, channel), height_, width_,
                  Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(Eigen::Index{width_} * kChannels, kChannels));
}

ConstPlaneMap ImageSet::plane(int view, int channel) const {
  return ConstPlaneMap(data_.data() + index(view, 0, 0, channel), height_, width_,
                       Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(Eigen::Index{width_} * kChannels, kChannels));
}

bool ImageSet::in_unit_range() const {
  return data_.size() == 0 || (data_.minCoeff() >= 0.0 && data_.maxCoeff() <= 1.0);
}

bool ImageSet::operator==(const ImageSet& other) const {
  return same_shape(other) && (data_ == other.data_).all();
}

void require_same_shape(const ImageSet& a, const ImageSet& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch(std::string(what) + ": shape " + std::to_string(a.views()) + "x" +
                        std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                        std::to_string(b.views()) + "x" + std::to_string(b.height()) + "x" +
                        std::to_string(b.width()));
  }
}

ImageSet clamp_pixels(const ImageSet& images) {
  ImageSet out = images;
  out.data() = out.data().max(0.0).min(1.0);
  return out;
}

ImageSet linf_project(const ImageSet& adv, const ImageSet& clean, double epsilon) {
  require_same_shape(adv, clean, "linf_project");
  ImageSet out = adv;
  out.data() = adv.data().max(clean.data() - epsilon).min(clean.data() + epsilon).max(0.0).min(1.0);
  return out;
}

double max_abs_diff(const ImageSet& a, const ImageSet& b) {
  require_same_shape(a, b, "max_abs_diff");
  return (a.data() - b.data()).abs().maxCoeff();
}

Plane luminance(const ImageSet& images, int view) {
  return 0.299 * images.plane(view, 0) + 0.587 * images.plane(view, 1) + 0.114 * images.plane(view, 2);
}

}  // namespace freqattack
