#pragma once

#include "freqattack/image.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace freqattack {

/// 8-bit RGB PNG as a one-view ImageSet (v / 255). Grey, alpha, palette and
/// 16-bit files are converted to 8-bit RGB first.
ImageSet read_png(const std::filesystem::path& path);

/// One view as 8-bit RGB, quantised as round(x * 255) after clamping.
void write_png(const std::filesystem::path& path, const ImageSet& images, int view);

/// "FIMG v1 N H W\n" followed by N*H*W*3 little-endian f64, view-major,
/// row-major, channels interleaved.
ImageSet read_fimg(const std::filesystem::path& path);
void write_fimg(const std::filesystem::path& path, const ImageSet& images);

/// Stacks the views of every path (.fimg holds N views, anything else is
/// read as PNG). Throws ShapeMismatch when sizes differ.
ImageSet load_views(const std::vector<std::filesystem::path>& paths);

/// round(x * 255) / 255 per element, after clamping to [0,1].
ImageSet quantize_8bit(const ImageSet& images);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace freqattack
