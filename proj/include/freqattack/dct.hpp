#pragma once

#include "freqattack/blocks.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace freqattack {

/// Orthonormal DCT-II matrix: C(k, i) = g(k) cos(pi/n (i + 1/2) k) with
/// g(0) = sqrt(1/n) and g(k) = sqrt(2/n) otherwise.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dct_matrix(int n) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> c(n, n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar dc = std::sqrt(Scalar(1) / Scalar(n));
  const Scalar ac = std::sqrt(Scalar(2) / Scalar(n));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      c(k, i) = (k == 0 ? dc : ac) * std::cos(pi / Scalar(n) * (Scalar(i) + Scalar(0.5)) * Scalar(k));
    }
  }
  return c;
}

/// The n x n DCT matrix shared by every block of side n.
class DctBasis {
 public:
  explicit DctBasis(int n);

  int n() const { return n_; }
  const Eigen::MatrixXd& matrix() const { return c_; }

  /// F = C X C^T
  template <typename Derived>
  Plane forward(const Eigen::MatrixBase<Derived>& block) const {
    return c_ * block * c_.transpose();
  }

  /// X = C^T F C
  template <typename Derived>
  Plane inverse(const Eigen::MatrixBase<Derived>& coeffs) const {
    return c_.transpose() * coeffs * c_;
  }

 private:
  int n_;
  Eigen::MatrixXd c_;
};

/// Low-frequency coefficient deltas, one s x s matrix per per-channel block,
/// aligned with a BlockGrid of the same geometry.
struct FreqPerturbation {
  int s = 0;
  std::vector<Plane> deltas;

  std::size_t size() const { return deltas.size(); }
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(deltas.size()) * s * s; }

  static FreqPerturbation zeros(std::size_t blocks, int s);

  /// Flat layout: block j, row k, column l at j*s*s + k*s + l.
  static FreqPerturbation from_flat(const Eigen::VectorXd& flat, int s);
  Eigen::VectorXd flat() const;
};

/// Per block F = C X C^T. Throws DimensionError if the block size differs
/// from the basis.
BlockGrid block_dct(const BlockGrid& grid, const DctBasis& basis);

/// Per block C^T (F + pad(delta)) C; coefficients outside the top-left s x s
/// are untouched.
BlockGrid perturbed_idct(const BlockGrid& coeffs, const FreqPerturbation& delta, const DctBasis& basis);

/// Zero-pads an s x s block into the top-left of an n x n block.
Plane pad_low_freq(const Plane& g, int n);
std::array<Plane, 3> pad_low_freq(const std::array<Plane, 3>& g, int n);

/// Per block C^T pad(g) C, laid out like `layout` (whose block values are
/// ignored). Linear in g; adjoint of taking the top-left s x s of block_dct.
BlockGrid freq_grad_to_spatial(const FreqPerturbation& g, const DctBasis& basis, const BlockGrid& layout);

/// Top-left s x s of every block.
FreqPerturbation low_freq_part(const BlockGrid& coeffs, int s);

}  // namespace freqattack
