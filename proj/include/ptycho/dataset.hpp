#pragma once

#include <cstdint>

#include "ptycho/png_io.hpp"
#include "ptycho/types.hpp"

namespace ptycho {

/// Complex object from an RGB image: amplitude is the mean of the red and
/// green channels, phase is the blue channel scaled to [-pi, pi] plus a
/// random global phase shift drawn from the seeded generator.  The applied
/// shift is written to *global_phase when given.
ComplexImage rgb_to_complex(const RgbImage& rgb, std::uint64_t seed,
                            double* global_phase = nullptr);

/// Central crop of all three channels.
RgbImage crop_center(const RgbImage& rgb, Index size);

}  // namespace ptycho
