#include "ptycho/forward.hpp"

#include <cmath>
#include <stdexcept>

#include "ptycho/fft.hpp"
#include "ptycho/parallel.hpp"
#include "ptycho/rng.hpp"

namespace ptycho {
namespace {

void check_position(const ScanGeometry& g, std::size_t ell) {
  if (ell >= g.positions.size()) throw std::out_of_range("probe position index out of range");
}

void check_image(const ComplexImage& x, const ScanGeometry& g) {
  if (x.rows() != g.image_h || x.cols() != g.image_w)
    throw std::invalid_argument("image shape does not match scan geometry");
}

void check_window(const ComplexImage& w, const ScanGeometry& g) {
  if (w.rows() != g.window_n || w.cols() != g.window_n)
    throw std::invalid_argument("window shape does not match scan geometry");
}

void check_probe(const Probe& p, const ScanGeometry& g) {
  if (p.size() != g.window_n || p.values.cols() != g.window_n)
    throw std::invalid_argument("probe size does not match scan geometry");
}

}  // namespace

ComplexImage extract_window(const ComplexImage& x, const ScanGeometry& g, std::size_t ell) {
  check_position(g, ell);
  check_image(x, g);
  const auto& p = g.positions[ell];
  return x.block(p[0], p[1], g.window_n, g.window_n);
}

ComplexImage embed_window(const ComplexImage& w, const ScanGeometry& g, std::size_t ell) {
  check_position(g, ell);
  check_window(w, g);
  ComplexImage out = ComplexImage::Zero(g.image_h, g.image_w);
  const auto& p = g.positions[ell];
  out.block(p[0], p[1], g.window_n, g.window_n) = w;
  return out;
}

void embed_window_add(ComplexImage& acc, const ComplexImage& w, const ScanGeometry& g,
                      std::size_t ell) {
  check_position(g, ell);
  check_window(w, g);
  check_image(acc, g);
  const auto& p = g.positions[ell];
  acc.block(p[0], p[1], g.window_n, g.window_n) += w;
}

ComplexImage exit_wave(const ComplexImage& x, const Probe& probe, const ScanGeometry& g,
                       std::size_t ell) {
  check_probe(probe, g);
  return probe.values * extract_window(x, g, ell);
}

ComplexImage exit_wave_adjoint(const ComplexImage& w, const Probe& probe, const ScanGeometry& g,
                               std::size_t ell) {
  check_probe(probe, g);
  check_window(w, g);
  return embed_window(probe.values.conjugate() * w, g, ell);
}

MeasurementSet forward(const ComplexImage& x, const Probe& probe, const ScanGeometry& g,
                       unsigned threads) {
  validate_geometry(g);
  check_probe(probe, g);
  check_image(x, g);
  MeasurementSet m;
  m.geometry = g;
  m.probe = probe;
  m.alpha = 0.0;
  m.seed = std::nullopt;
  m.amplitudes.resize(g.count());
  parallel_for(g.count(), threads, [&](std::size_t ell) {
    m.amplitudes[ell] = fft2(exit_wave(x, probe, g, ell)).abs();
  });
  return m;
}

RealImage shot_noise_relative_perturbation(Index rows, Index cols, double alpha,
                                           std::uint64_t seed, std::size_t ell) {
  Rng rng = substream(seed, static_cast<std::uint64_t>(ell));
  RealImage pert(rows, cols);
  for (Index i = 0; i < pert.size(); ++i) pert.data()[i] = alpha * rng.normal();
  return pert;
}

MeasurementSet add_shot_noise(const MeasurementSet& measurements, double alpha,
                              std::uint64_t seed, unsigned threads) {
  if (alpha < 0) throw std::invalid_argument("add_shot_noise: alpha must be nonnegative");
  MeasurementSet out = measurements;
  out.alpha = alpha;
  out.seed = seed;
  if (alpha == 0.0) return out;
  parallel_for(out.amplitudes.size(), threads, [&](std::size_t ell) {
    RealImage& a = out.amplitudes[ell];
    const RealImage pert = shot_noise_relative_perturbation(a.rows(), a.cols(), alpha, seed, ell);
    for (Index i = 0; i < a.size(); ++i) {
      const double intensity = a.data()[i] * a.data()[i];
      // Gaussian surrogate of scaled Poisson counting noise: the intensity
      // perturbation has variance alpha^2 * I, i.e. I' = I + sqrt(I) * (alpha eta).
      const double noisy = std::max(intensity + std::sqrt(intensity) * pert.data()[i], 0.0);
      a.data()[i] = std::sqrt(noisy);
    }
  });
  return out;
}

RealImage intensity_weight_map(const Probe& probe, const ScanGeometry& g) {
  validate_geometry(g);
  check_probe(probe, g);
  RealImage map = RealImage::Zero(g.image_h, g.image_w);
  const RealImage p2 = probe.intensity();
  for (const auto& pos : g.positions)
    map.block(pos[0], pos[1], g.window_n, g.window_n) += p2;
  return map;
}

}  // namespace ptycho
