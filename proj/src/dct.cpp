#include "freqattack/dct.hpp"

#include "freqattack/errors.hpp"

#include <string>

namespace freqattack {
namespace {

void require_basis(const BlockGrid& grid, const DctBasis& basis) {
  if (grid.n != basis.n()) {
    throw DimensionError("block size " + std::to_string(grid.n) + " does not match DCT basis " +
                         std::to_string(basis.n()));
  }
}

void require_aligned(const BlockGrid& grid, const FreqPerturbation& delta) {
  if (delta.size() != grid.size()) {
    throw DimensionError("perturbation has " + std::to_string(delta.size()) + " blocks, grid has " +
                         std::to_string(grid.size()));
  }
  if (delta.s < 1 || delta.s > grid.n) {
    throw DimensionError("low-frequency side " + std::to_string(delta.s) + " outside [1, " +
                         std::to_string(grid.n) + "]");
  }
}

}  // namespace

DctBasis::DctBasis(int n) : n_(n) {
  if (n < 1) throw DimensionError("DCT size must be at least 1");
  c_ = dct_matrix<double>(n);
}

FreqPerturbation FreqPerturbation::zeros(std::size_t blocks, int s) {
  return {s, std::vector<Plane>(blocks, Plane::Zero(s, s))};
}

FreqPerturbation FreqPerturbation::from_flat(const Eigen::VectorXd& flat, int s) {
  const Eigen::Index per_block = Eigen::Index{s} * s;
  if (s < 1 || flat.size() % per_block != 0) {
    throw DimensionError("flat perturbation of length " + std::to_string(flat.size()) +
                         " is not a whole number of " + std::to_string(s) + "x" + std::to_string(s) + " blocks");
  }
  FreqPerturbation out;
  out.s = s;
  out.deltas.reserve(static_cast<std::size_t>(flat.size() / per_block));
  for (Eigen::Index offset = 0; offset < flat.size(); offset += per_block) {
    out.deltas.emplace_back(Eigen::Map<const Plane>(flat.data() + offset, s, s));
  }
  return out;
}

Eigen::VectorXd FreqPerturbation::flat() const {
  const Eigen::Index per_block = Eigen::Index{s} * s;
  Eigen::VectorXd out(dimension());
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    Eigen::Map<Plane>(out.data() + static_cast<Eigen::Index>(j) * per_block, s, s) = deltas[j];
  }
  return out;
}

BlockGrid block_dct(const BlockGrid& grid, const DctBasis& basis) {
  require_basis(grid, basis);
  BlockGrid out = grid;
  for (Plane& block : out.blocks) block = basis.forward(block);
  return out;
}

BlockGrid perturbed_idct(const BlockGrid& coeffs, const FreqPerturbation& delta, const DctBasis& basis) {
  require_basis(coeffs, basis);
  require_aligned(coeffs, delta);
  BlockGrid out = coeffs;
  const int s = delta.s;
  for (std::size_t j = 0; j < out.blocks.size(); ++j) {
    Plane f = coeffs.blocks[j];
    f.topLeftCorner(s, s) += delta.deltas[j];
    out.blocks[j] = basis.inverse(f);
  }
  return out;
}

Plane pad_low_freq(const Plane& g, int n) {
  if (g.rows() != g.cols() || g.rows() > n) {
    throw DimensionError("cannot pad a " + std::to_string(g.rows()) + "x" + std::to_string(g.cols()) +
                         " block to " + std::to_string(n) + "x" + std::to_string(n));
  }
  Plane out = Plane::Zero(n, n);
  out.topLeftCorner(g.rows(), g.cols()) = g;
  return out;
}

std::array<Plane, 3> pad_low_freq(const std::array<Plane, 3>& g, int n) {
  return {pad_low_freq(g[0], n), pad_low_freq(g[1], n), pad_low_freq(g[2], n)};
}

BlockGrid freq_grad_to_spatial(const FreqPerturbation& g, const DctBasis& basis, const BlockGrid& layout) {
  require_basis(layout, basis);
  require_aligned(layout, g);
  BlockGrid out = layout;
  for (std::size_t j = 0; j < out.blocks.size(); ++j) out.blocks[j] = basis.inverse(pad_low_freq(g.deltas[j], basis.n()));
  return out;
}

FreqPerturbation low_freq_part(const BlockGrid& coeffs, int s) {
  if (s < 1 || s > coeffs.n) throw DimensionError("low-frequency side out of range");
  FreqPerturbation out;
  out.s = s;
  out.deltas.reserve(coeffs.size());
  for (const Plane& block : coeffs.blocks) out.deltas.emplace_back(block.topLeftCorner(s, s));
  return out;
}

}  // namespace freqattack
