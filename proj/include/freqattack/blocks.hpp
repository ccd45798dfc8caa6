#pragma once

#include "freqattack/image.hpp"

#include <vector>

namespace freqattack {

/// Where a per-channel block lives inside its ImageSet.
struct BlockOrigin {
  int view = 0;
  int channel = 0;
  int row = 0;
  int col = 0;

  bool operator==(const BlockOrigin&) const = default;
};

/// Per-channel n x n tiles of an ImageSet. Block order is view, channel,
/// block row, block column; `origins[j]` locates `blocks[j]`.
struct BlockGrid {
  int n = 0;
  int views = 0;
  int height = 0;
  int width = 0;
  std::vector<Plane> blocks;
  std::vector<BlockOrigin> origins;

  std::size_t size() const { return blocks.size(); }
  int blocks_per_row() const { return width / n; }
  int blocks_per_col() const { return height / n; }
  /// Spatial blocks per view (one spatial block holds three channel blocks).
  int spatial_blocks_per_view() const { return blocks_per_row() * blocks_per_col(); }
};

/// Number of per-channel blocks: N * 3 * (H/n) * (W/n).
std::size_t block_count(int views, int height, int width, int n);

/// Throws DimensionError unless H and W are multiples of n.
void require_divisible(int height, int width, int n);

BlockGrid partition_blocks(const ImageSet& images, int n);

/// Places each block at its recorded origin; block order is irrelevant.
ImageSet assemble_blocks(const BlockGrid& grid);

}  // namespace freqattack
