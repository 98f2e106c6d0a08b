#include "ptycho/dataset.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ptycho/image.hpp"
#include "ptycho/rng.hpp"

namespace ptycho {

ComplexImage rgb_to_complex(const RgbImage& rgb, std::uint64_t seed, double* global_phase) {
  if (rgb.g.rows() != rgb.rows() || rgb.b.rows() != rgb.rows() || rgb.g.cols() != rgb.cols() ||
      rgb.b.cols() != rgb.cols())
    throw std::invalid_argument("rgb_to_complex: channel shape mismatch");

  Rng rng(seed);
  const double theta0 = (2.0 * rng.uniform() - 1.0) * std::numbers::pi;  // uniform in [-pi, pi)
  if (global_phase) *global_phase = theta0;

  ComplexImage out(rgb.rows(), rgb.cols());
  for (Index i = 0; i < out.size(); ++i) {
    const double amplitude = 0.5 * (rgb.r.data()[i] + rgb.g.data()[i]);
    const double phase = wrap_phase(2.0 * std::numbers::pi * rgb.b.data()[i] - std::numbers::pi + theta0);
    out.data()[i] = std::polar(amplitude, phase);
  }
  return out;
}

RgbImage crop_center(const RgbImage& rgb, Index size) {
  if (size < 1 || size > rgb.rows() || size > rgb.cols())
    throw std::invalid_argument("crop_center: crop size exceeds image");
  const Index r0 = (rgb.rows() - size) / 2;
  const Index c0 = (rgb.cols() - size) / 2;
  return RgbImage{rgb.r.block(r0, c0, size, size), rgb.g.block(r0, c0, size, size),
                  rgb.b.block(r0, c0, size, size)};
}

}  // namespace ptycho
