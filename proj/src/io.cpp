#include "freqattack/io.hpp"

#include "freqattack/errors.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

static_assert(std::endian::native == std::endian::little, "FIMG payloads are copied as native doubles");

namespace freqattack {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_file(const std::filesystem::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

std::uint8_t to_byte(double x) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
}

}  // namespace

ImageSet read_png(const std::filesystem::path& path) {
  File file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("cannot decode PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * height);
  rows.resize(height);
  for (int r = 0; r < height; ++r) rows[r] = pixels.data() + r * stride;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  ImageSet out(1, height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < 3; ++ch) out(0, r, c, ch) = rows[r][c * 3 + ch] / 255.0;
    }
  }
  return out;
}

void write_png(const std::filesystem::path& path, const ImageSet& images, int view) {
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(images.height()) * images.width() * 3);
  for (int r = 0; r < images.height(); ++r) {
    for (int c = 0; c < images.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        pixels[(static_cast<std::size_t>(r) * images.width() + c) * 3 + ch] = to_byte(images(view, r, c, ch));
      }
    }
  }

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    File file = open_file(tmp, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, &info);
      throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw IoError("cannot encode PNG " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, images.width(), images.height(), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < images.height(); ++r) {
      png_write_row(png, pixels.data() + static_cast<std::size_t>(r) * images.width() * 3);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot write " + path.string() + ": " + ec.message());
}

ImageSet read_fimg(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::istringstream header(line);
  std::string magic, version;
  int views = 0, height = 0, width = 0;
  if (!(header >> magic >> version >> views >> height >> width) || magic != "FIMG" || version != "v1" || views < 1 ||
      height < 1 || width < 1) {
    throw IoError(path.string() + ": bad FIMG header '" + line + "'");
  }
  ImageSet out(views, height, width);
  in.read(reinterpret_cast<char*>(out.data().data()), static_cast<std::streamsize>(out.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(out.size() * sizeof(double))) {
    throw IoError(path.string() + ": truncated FIMG payload");
  }
  return out;
}

void write_fimg(const std::filesystem::path& path, const ImageSet& images) {
  std::string contents = "FIMG v1 " + std::to_string(images.views()) + " " + std::to_string(images.height()) + " " +
                         std::to_string(images.width()) + "\n";
  const auto* bytes = reinterpret_cast<const char*>(images.data().data());
  contents.append(bytes, static_cast<std::size_t>(images.size()) * sizeof(double));
  write_file_atomic(path, contents);
}

ImageSet load_views(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw ConfigError("no input images given");
  std::vector<ImageSet> parts;
  for (const auto& p : paths) parts.push_back(p.extension() == ".fimg" ? read_fimg(p) : read_png(p));
  int views = 0;
  for (const ImageSet& part : parts) {
    if (part.height() != parts.front().height() || part.width() != parts.front().width()) {
      throw ShapeMismatch("input images have different sizes");
    }
    views += part.views();
  }
  ImageSet out(views, parts.front().height(), parts.front().width());
  Eigen::Index offset = 0;
  for (const ImageSet& part : parts) {
    out.data().segment(offset, part.size()) = part.data();
    offset += part.size();
  }
  return out;
}

ImageSet quantize_8bit(const ImageSet& images) {
  ImageSet out = images;
  out.data() = (images.data().max(0.0).min(1.0) * 255.0).round() / 255.0;
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot write " + path.string() + ": " + ec.message());
}

}  // namespace freqattack
