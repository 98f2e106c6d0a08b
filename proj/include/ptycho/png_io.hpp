#pragma once

#include <filesystem>

#include "ptycho/types.hpp"

namespace ptycho {

/// RGB image with channels normalized to [0, 1] (8-bit values divided by 255
/// exactly).
struct RgbImage {
  RealImage r, g, b;

  Index rows() const { return r.rows(); }
  Index cols() const { return r.cols(); }
};

/// Reads any 8-bit PNG (gray, palette, RGB, with or without alpha) as RGB.
RgbImage load_png_rgb(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG; values are clamped to [0, 1] and scaled by
/// 255 with rounding.
void save_png_gray(const std::filesystem::path& path, const RealImage& values);

/// Reads an 8-bit grayscale PNG back to [0, 1] values.
RealImage load_png_gray(const std::filesystem::path& path);

/// Maps phase values from (-pi, pi] linearly onto [0, 1] for export.
RealImage phase_to_unit(const RealImage& phase);

/// Inverse of phase_to_unit (up to 8-bit quantization when round-tripped
/// through a PNG).
RealImage unit_to_phase(const RealImage& unit);

void save_png_rgb(const std::filesystem::path& path, const RgbImage& rgb);

}  // namespace ptycho
