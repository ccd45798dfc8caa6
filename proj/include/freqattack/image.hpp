#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace freqattack {

/// Row-major single-channel plane.
using Plane = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Strided view of one channel of one view inside an ImageSet buffer.
using PlaneMap = Eigen::Map<Plane, Eigen::Unaligned, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
using ConstPlaneMap =
    Eigen::Map<const Plane, Eigen::Unaligned, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

/// N views of H x W x 3 pixels stored contiguously, view-major, row-major,
/// channels interleaved (the FIMG and wire layout).
///
/// The same type carries pixel images (values in [0,1]) and gradients with
/// respect to them; only the former are checked with `in_unit_range()`.
class ImageSet {
 public:
  static constexpr int kChannels = 3;

  ImageSet() = default;
  ImageSet(int views, int height, int width, double fill = 0.0);

  int views() const { return views_; }
  int height() const { return height_; }
  int width() const { return width_; }
  Eigen::Index size() const { return data_.size(); }
  Eigen::Index view_size() const { return Eigen::Index{height_} * width_ * kChannels; }

  Eigen::ArrayXd& data() { return data_; }
  const Eigen::ArrayXd& data() const { return data_; }

  double& operator()(int view, int row, int col, int channel) { return data_[index(view, row, col, channel)]; }
  double operator()(int view, int row, int col, int channel) const {
    return data_[index(view, row, col, channel)];
  }

  PlaneMap plane(int view, int channel);
  ConstPlaneMap plane(int view, int channel) const;

  bool same_shape(const ImageSet& other) const {
    return views_ == other.views_ && height_ == other.height_ && width_ == other.width_;
  }
  bool in_unit_range() const;

  /// All-equal comparison of shape and every value.
  bool operator==(const ImageSet& other) const;

  ImageSet zeros_like() const { return ImageSet(views_, height_, width_); }

 private:
  Eigen::Index index(int view, int row, int col, int channel) const {
    return ((Eigen::Index{view} * height_ + row) * width_ + col) * kChannels + channel;
  }

  int views_ = 0;
  int height_ = 0;
  int width_ = 0;
  Eigen::ArrayXd data_;
};

/// Throws ShapeMismatch unless `a` and `b` have identical geometry.
void require_same_shape(const ImageSet& a, const ImageSet& b, const char* what);

ImageSet clamp_pixels(const ImageSet& images);

/// Clamp into the L-infinity ball of radius `epsilon` around `clean`, then
/// into [0,1].
ImageSet linf_project(const ImageSet& adv, const ImageSet& clean, double epsilon);

/// Largest absolute per-element difference.
double max_abs_diff(const ImageSet& a, const ImageSet& b);

/// Rec. 601 luma of one view, H x W.
Plane luminance(const ImageSet& images, int view);

}  // namespace freqattack
