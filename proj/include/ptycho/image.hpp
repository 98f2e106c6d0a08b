#pragma once

#include <stdexcept>
#include <utility>

#include "ptycho/types.hpp"

namespace ptycho {

/// MSE values below this floor saturate the PSNR report instead of producing
/// unbounded dB numbers.
inline constexpr double kMseFloor = 1e-12;

struct PsnrValue {
  double db = 0.0;
  bool saturated = false;
};

struct MetricReport {
  double psnr_amplitude = 0.0;
  double psnr_phase = 0.0;
  bool amplitude_saturated = false;
  bool phase_saturated = false;
  Index border_excluded = 0;
};

/// Wraps an angle into (-pi, pi].
double wrap_phase(double phi);

/// Amplitude/phase split; the phase of a zero-magnitude pixel is 0.
std::pair<RealImage, RealImage> decompose(const ComplexImage& img);

/// Rotates `reco` by the global phase that minimizes ||e^{i theta} reco - gt||.
/// A zero inner product leaves the input unrotated.
ComplexImage global_phase_align(const ComplexImage& reco, const ComplexImage& gt);

/// Mean squared angular error with wrap-around (the distance on the circle).
double mse_phase(const RealImage& phi_reco, const RealImage& phi_gt);

/// 10 log10((2 pi)^2 / MSE_phi), saturated at the MSE floor.
PsnrValue psnr_phase(const RealImage& phi_reco, const RealImage& phi_gt);

/// 10 log10(peak^2 / MSE) with peak = max of the ground-truth amplitude.
PsnrValue psnr_amplitude(const RealImage& a_reco, const RealImage& a_gt);

template <typename Scalar>
Image<Scalar> crop_border(const Image<Scalar>& img, Index border) {
  if (border < 0) throw std::invalid_argument("crop_border: negative border");
  if (2 * border >= img.rows() || 2 * border >= img.cols())
    throw std::invalid_argument("crop_border: border too large for image");
  return img.block(border, border, img.rows() - 2 * border, img.cols() - 2 * border);
}

/// Align, crop and compare a reconstruction against ground truth.
MetricReport compute_metrics(const ComplexImage& reco, const ComplexImage& gt, Index border);

}  // namespace ptycho
