#include "ptycho/png_io.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <png.h>

namespace ptycho {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

// Reads interleaved 8-bit rows with `channels` components per pixel.
std::vector<std::uint8_t> read_png_rows(const std::filesystem::path& path, int target_channels,
                                        Index& rows, Index& cols) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw std::runtime_error("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng: read struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("libpng: info struct allocation failed");
  }
  std::vector<std::uint8_t> data;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng: failed to decode " + path.string());
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  png_set_expand(png);  // palette -> rgb, low bit depth -> 8-bit, tRNS -> alpha
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (target_channels == 3) {
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
  } else {
    if (png_get_color_type(png, info) & PNG_COLOR_MASK_COLOR)
      png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_set_strip_alpha(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  rows = static_cast<Index>(png_get_image_height(png, info));
  cols = static_cast<Index>(png_get_image_width(png, info));
  const std::size_t stride = png_get_rowbytes(png, info);
  if (stride != static_cast<std::size_t>(cols) * static_cast<std::size_t>(target_channels)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png read: unexpected channel layout in " + path.string());
  }

  data.resize(static_cast<std::size_t>(rows) * stride);
  row_ptrs.resize(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r) row_ptrs[static_cast<std::size_t>(r)] = data.data() + r * stride;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return data;
}

void write_png_rows(const std::filesystem::path& path, const std::uint8_t* data, Index rows,
                    Index cols, int channels) {
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng: write struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng: info struct allocation failed");
  }
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(rows));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng: failed to encode " + path.string());
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  const std::size_t stride = static_cast<std::size_t>(cols) * static_cast<std::size_t>(channels);
  for (Index r = 0; r < rows; ++r)
    row_ptrs[static_cast<std::size_t>(r)] = const_cast<png_bytep>(data + r * stride);
  png_set_rows(png, info, row_ptrs.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RgbImage load_png_rgb(const std::filesystem::path& path) {
  Index rows = 0, cols = 0;
  const auto data = read_png_rows(path, 3, rows, cols);
  RgbImage img{RealImage(rows, cols), RealImage(rows, cols), RealImage(rows, cols)};
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const std::size_t at = (static_cast<std::size_t>(r) * cols + c) * 3;
      img.r(r, c) = data[at] / 255.0;
      img.g(r, c) = data[at + 1] / 255.0;
      img.b(r, c) = data[at + 2] / 255.0;
    }
  }
  return img;
}

void save_png_gray(const std::filesystem::path& path, const RealImage& values) {
  std::vector<std::uint8_t> data(static_cast<std::size_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i) data[static_cast<std::size_t>(i)] = quantize(values.data()[i]);
  write_png_rows(path, data.data(), values.rows(), values.cols(), 1);
}

RealImage load_png_gray(const std::filesystem::path& path) {
  Index rows = 0, cols = 0;
  const auto data = read_png_rows(path, 1, rows, cols);
  RealImage img(rows, cols);
  for (Index i = 0; i < img.size(); ++i) img.data()[i] = data[static_cast<std::size_t>(i)] / 255.0;
  return img;
}

RealImage phase_to_unit(const RealImage& phase) {
  return (phase + std::numbers::pi) / (2.0 * std::numbers::pi);
}

RealImage unit_to_phase(const RealImage& unit) {
  return unit * (2.0 * std::numbers::pi) - std::numbers::pi;
}

void save_png_rgb(const std::filesystem::path& path, const RgbImage& rgb) {
  if (rgb.g.rows() != rgb.rows() || rgb.b.rows() != rgb.rows() || rgb.g.cols() != rgb.cols() ||
      rgb.b.cols() != rgb.cols())
    throw std::invalid_argument("save_png_rgb: channel shape mismatch");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(rgb.rows()) * rgb.cols() * 3);
  for (Index r = 0; r < rgb.rows(); ++r) {
    for (Index c = 0; c < rgb.cols(); ++c) {
      const std::size_t at = (static_cast<std::size_t>(r) * rgb.cols() + c) * 3;
      data[at] = quantize(rgb.r(r, c));
      data[at + 1] = quantize(rgb.g(r, c));
      data[at + 2] = quantize(rgb.b(r, c));
    }
  }
  write_png_rows(path, data.data(), rgb.rows(), rgb.cols(), 3);
}

}  // namespace ptycho
