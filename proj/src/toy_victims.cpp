#include "freqattack/toy_victims.hpp"

#include "freqattack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace freqattack {
namespace {

// out(r, c) = sum_k w_k in(r, reflect(c + k - R)) along rows or columns.
template <bool Horizontal, typename Kernel>
Plane correlate(const Plane& in, const Kernel& w) {
  constexpr int R = BlurVictim::kRadius;
  Plane out = Plane::Zero(in.rows(), in.cols());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
      double acc = 0.0;
      for (int k = -R; k <= R; ++k) {
        acc += Horizontal ? w[k + R] * in(r, reflect_index(static_cast<int>(c) + k, static_cast<int>(in.cols())))
                          : w[k + R] * in(reflect_index(static_cast<int>(r) + k, static_cast<int>(in.rows())), c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

// Transpose of correlate: scatter each output back along the same taps.
template <bool Horizontal, typename Kernel>
Plane correlate_adjoint(const Plane& g, const Kernel& w) {
  constexpr int R = BlurVictim::kRadius;
  Plane out = Plane::Zero(g.rows(), g.cols());
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      for (int k = -R; k <= R; ++k) {
        if (Horizontal) {
          out(r, reflect_index(static_cast<int>(c) + k, static_cast<int>(g.cols()))) += w[k + R] * g(r, c);
        } else {
          out(reflect_index(static_cast<int>(r) + k, static_cast<int>(g.rows())), c) += w[k + R] * g(r, c);
        }
      }
    }
  }
  return out;
}

// Applies m (3x3) across the channels of every pixel.
ImageSet mix_channels(const ImageSet& in, const Eigen::Matrix3d& m) {
  ImageSet out = in;
  const Eigen::Index pixels = in.size() / ImageSet::kChannels;
  Eigen::Map<const Eigen::Matrix<double, 3, Eigen::Dynamic>> src(in.data().data(), 3, pixels);
  Eigen::Map<Eigen::Matrix<double, 3, Eigen::Dynamic>> dst(out.data().data(), 3, pixels);
  dst.noalias() = m * src;
  return out;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

int reflect_index(int i, int size) {
  if (size == 1) return 0;
  const int period = 2 * (size - 1);
  i %= period;
  if (i < 0) i += period;
  return i < size ? i : period - i;
}

BlurVictim::BlurVictim() {
  for (int k = -kRadius; k <= kRadius; ++k) kernel_[k + kRadius] = std::exp(-0.5 * k * k);
  kernel_ /= kernel_.sum();
  mix_ << 0.80, 0.15, 0.05,
          0.10, 0.80, 0.10,
          0.05, 0.15, 0.80;
}

ImageSet BlurVictim::do_render(const ImageSet& inputs) const {
  ImageSet blurred = inputs.zeros_like();
  for (int v = 0; v < inputs.views(); ++v) {
    for (int c = 0; c < ImageSet::kChannels; ++c) {
      const Plane p = inputs.plane(v, c);
      blurred.plane(v, c) = correlate<false>(correlate<true>(p, kernel_), kernel_);
    }
  }
  return mix_channels(blurred, mix_);
}

ImageSet BlurVictim::do_render_grad(const ImageSet& inputs, const ImageSet& upstream) const {
  const ImageSet unmixed = mix_channels(upstream, mix_.transpose());
  ImageSet grad = inputs.zeros_like();
  for (int v = 0; v < inputs.views(); ++v) {
    for (int c = 0; c < ImageSet::kChannels; ++c) {
      const Plane g = unmixed.plane(v, c);
      grad.plane(v, c) = correlate_adjoint<true>(correlate_adjoint<false>(g, kernel_), kernel_);
    }
  }
  return grad;
}

std::vector<SplatPrimitive> splats_from_view(const ImageSet& image, int view, double radius) {
  std::vector<SplatPrimitive> out;
  out.reserve(static_cast<std::size_t>(image.height()) * image.width());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      SplatPrimitive p;
      p.position = {c + 0.5, r + 0.5};
      p.radius = radius;
      p.color = {image(view, r, c, 0), image(view, r, c, 1), image(view, r, c, 2)};
      const double luma = 0.299 * p.color[0] + 0.587 * p.color[1] + 0.114 * p.color[2];
      p.opacity = 0.05 + 0.9 * logistic(4.0 * (luma - 0.5));
      p.depth_key = luma;
      out.push_back(p);
    }
  }
  return out;
}

void composite_splats(const std::vector<SplatPrimitive>& primitives, const ViewTransform& transform,
                      const ToySplatOptions& options, ImageSet& out, int out_view) {
  const int height = out.height();
  const int width = out.width();

  // Front-to-back order: ascending depth key, ties by primitive index.
  std::vector<int> order(primitives.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return primitives[a].depth_key < primitives[b].depth_key; });

  std::vector<Eigen::Vector2d> centers(primitives.size());
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    centers[i] = transform.leftCols<2>() * primitives[i].position + transform.col(2);
  }

  const bool cull = std::isfinite(options.cull_factor);
  const double reach = options.cull_factor * options.radius;

  // Buckets of side `reach` over [-reach, size + reach); each bucket lists
  // ranks in `order`, so it is already front-to-back sorted.
  const double cell = cull ? std::max(reach, 1e-9) : 1.0;
  const int cells_x = cull ? static_cast<int>(std::ceil((width + 2.0 * reach) / cell)) : 0;
  const int cells_y = cull ? static_cast<int>(std::ceil((height + 2.0 * reach) / cell)) : 0;
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(cells_x) * cells_y);
  if (cull) {
    for (int rank = 0; rank < static_cast<int>(order.size()); ++rank) {
      const Eigen::Vector2d& p = centers[order[rank]];
      const int bx = static_cast<int>(std::floor((p.x() + reach) / cell));
      const int by = static_cast<int>(std::floor((p.y() + reach) / cell));
      // Outside the padded range: farther than `reach` from every pixel centre.
      if (bx < 0 || by < 0 || bx >= cells_x || by >= cells_y) continue;
      buckets[static_cast<std::size_t>(by) * cells_x + bx].push_back(rank);
    }
  }

  std::vector<int> candidates;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const Eigen::Vector2d pixel(c + 0.5, r + 0.5);
      candidates.clear();
      if (cull) {
        const int bx = static_cast<int>(std::floor((pixel.x() + reach) / cell));
        const int by = static_cast<int>(std::floor((pixel.y() + reach) / cell));
        for (int y = std::max(by - 1, 0); y <= std::min(by + 1, cells_y - 1); ++y) {
          for (int x = std::max(bx - 1, 0); x <= std::min(bx + 1, cells_x - 1); ++x) {
            const auto& bucket = buckets[static_cast<std::size_t>(y) * cells_x + x];
            candidates.insert(candidates.end(), bucket.begin(), bucket.end());
          }
        }
        std::sort(candidates.begin(), candidates.end());
      } else {
        candidates.resize(order.size());
        std::iota(candidates.begin(), candidates.end(), 0);
      }

      Eigen::Vector3d color = Eigen::Vector3d::Zero();
      double transmittance = 1.0;
      for (int rank : candidates) {
        const SplatPrimitive& prim = primitives[order[rank]];
        const double d2 = (centers[order[rank]] - pixel).squaredNorm();
        if (cull && d2 > reach * reach) continue;
        const double alpha = prim.opacity * std::exp(-d2 / (2.0 * prim.radius * prim.radius));
        color += prim.color * (alpha * transmittance);
        transmittance *= 1.0 - alpha;
      }
      for (int ch = 0; ch < ImageSet::kChannels; ++ch) out(out_view, r, c, ch) = std::clamp(color[ch], 0.0, 1.0);
    }
  }
}

std::vector<ViewTransform> default_view_transforms(int views) {
  std::vector<ViewTransform> out;
  for (int k = 0; k < views; ++k) {
    const double scale = std::pow(1.05, k);
    ViewTransform t;
    t << scale, 0.0, 2.0 * k,
         0.0, scale, 1.0 * k;
    out.push_back(t);
  }
  return out;
}

ImageSet toy_splat_render(const ImageSet& inputs, const std::vector<ViewTransform>& transforms,
                          const ToySplatOptions& options) {
  if (static_cast<int>(transforms.size()) != inputs.views()) {
    throw ShapeMismatch("toy splat renderer needs one view transform per view");
  }
  if (!(options.radius > 0.0) || !(options.cull_factor > 0.0)) {
    throw ConfigError("toy splat radius and cull factor must be positive");
  }
  const std::vector<SplatPrimitive> primitives = splats_from_view(inputs, 0, options.radius);
  ImageSet out = inputs.zeros_like();
  for (int v = 0; v < inputs.views(); ++v) composite_splats(primitives, transforms[v], options, out, v);
  return out;
}

ToySplatVictim::ToySplatVictim(ToySplatOptions options, std::vector<ViewTransform> transforms)
    : options_(options), transforms_(std::move(transforms)) {}

ImageSet ToySplatVictim::do_render(const ImageSet& inputs) const {
  return toy_splat_render(inputs, transforms_.empty() ? default_view_transforms(inputs.views()) : transforms_,
                          options_);
}

}  // namespace freqattack
