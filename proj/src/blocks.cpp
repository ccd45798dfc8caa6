#include "freqattack/blocks.hpp"

#include "freqattack/errors.hpp"

#include <string>

namespace freqattack {

std::size_t block_count(int views, int height, int width, int n) {
  require_divisible(height, width, n);
  return static_cast<std::size_t>(views) * ImageSet::kChannels * (height / n) * (width / n);
}

void require_divisible(int height, int width, int n) {
  if (n < 1) throw DimensionError("block size must be at least 1, got " + std::to_string(n));
  if (height % n != 0 || width % n != 0) {
    throw DimensionError("image " + std::to_string(height) + "x" + std::to_string(width) +
                         " is not divisible into " + std::to_string(n) + "x" + std::to_string(n) + " blocks");
  }
}

BlockGrid partition_blocks(const ImageSet& images, int n) {
  BlockGrid grid;
  grid.n = n;
  grid.views = images.views();
  grid.height = images.height();
  grid.width = images.width();
  const std::size_t count = block_count(images.views(), images.height(), images.width(), n);
  grid.blocks.reserve(count);
  grid.origins.reserve(count);
  for (int v = 0; v < images.views(); ++v) {
    for (int c = 0; c < ImageSet::kChannels; ++c) {
      const ConstPlaneMap plane = images.plane(v, c);
      for (int r = 0; r < images.height(); r += n) {
        for (int col = 0; col < images.width(); col += n) {
          grid.blocks.emplace_back(plane.block(r, col, n, n));
          grid.origins.push_back({v, c, r, col});
        }
      }
    }
  }
  return grid;
}

ImageSet assemble_blocks(const BlockGrid& grid) {
  if (grid.blocks.size() != grid.origins.size() ||
      grid.blocks.size() != block_count(grid.views, grid.height, grid.width, grid.n)) {
    throw DimensionError("malformed block grid");
  }
  ImageSet out(grid.views, grid.height, grid.width);
  for (std::size_t j = 0; j < grid.blocks.size(); ++j) {
    const BlockOrigin& o = grid.origins[j];
    if (grid.blocks[j].rows() != grid.n || grid.blocks[j].cols() != grid.n) {
      throw DimensionError("block " + std::to_string(j) + " is not " + std::to_string(grid.n) + "x" +
                           std::to_string(grid.n));
    }
    out.plane(o.view, o.channel).block(o.row, o.col, grid.n, grid.n) = grid.blocks[j];
  }
  return out;
}

}  // namespace freqattack
