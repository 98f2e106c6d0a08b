#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ptycho/probe.hpp"
#include "ptycho/scan.hpp"
#include "ptycho/types.hpp"

namespace ptycho {

/// Far-field amplitude data: one nonnegative N x N array per probe position.
struct MeasurementSet {
  ScanGeometry geometry;
  Probe probe;
  std::vector<RealImage> amplitudes;
  double alpha = 0.0;
  std::optional<std::uint64_t> seed;  // nullopt = noiseless
};

/// Copies the window at position ell out of the full image.
ComplexImage extract_window(const ComplexImage& x, const ScanGeometry& geometry, std::size_t ell);

/// Adjoint of extract_window: places w at position ell into a zero image.
ComplexImage embed_window(const ComplexImage& w, const ScanGeometry& geometry, std::size_t ell);

/// Accumulating variant of embed_window.
void embed_window_add(ComplexImage& acc, const ComplexImage& w, const ScanGeometry& geometry,
                      std::size_t ell);

/// Exit wave P .* (window at ell); the per-probe forward operator before
/// propagation.
ComplexImage exit_wave(const ComplexImage& x, const Probe& probe, const ScanGeometry& geometry,
                       std::size_t ell);

/// Adjoint of exit_wave: embeds conj(P) .* w at position ell.
ComplexImage exit_wave_adjoint(const ComplexImage& w, const Probe& probe,
                               const ScanGeometry& geometry, std::size_t ell);

/// Noiseless measurement: amplitudes |FFT2(exit wave)| per position,
/// unnormalized forward DFT.
MeasurementSet forward(const ComplexImage& x, const Probe& probe, const ScanGeometry& geometry,
                       unsigned threads = 1);

/// Intensity perturbations alpha * eta at unit intensity, eta ~ N(0,1), drawn
/// from the per-position substream used by add_shot_noise.  Exposed so the
/// noise model statistics can be validated on the exact sampling path.
RealImage shot_noise_relative_perturbation(Index rows, Index cols, double alpha,
                                           std::uint64_t seed, std::size_t ell);

/// Shot noise in the intensity domain: I' = I + sqrt(I) * (alpha eta), the
/// Gaussian surrogate of the scaled Poisson model y^2/alpha^2 ~
/// Poisson(I/alpha^2), clamped at zero and stored back as amplitude
/// sqrt(I').  Deterministic per (seed, position index) and independent of
/// thread count.
MeasurementSet add_shot_noise(const MeasurementSet& measurements, double alpha,
                              std::uint64_t seed, unsigned threads = 1);

/// Accumulated probe intensity per image pixel: sum over positions of |P|^2
/// embedded at p_ell.  The pixelwise squared weight of the averaging step.
RealImage intensity_weight_map(const Probe& probe, const ScanGeometry& geometry);

}  // namespace ptycho
