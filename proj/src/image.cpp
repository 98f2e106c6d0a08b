#include "ptycho/image.hpp"

#include <cmath>
#include <numbers>

namespace ptycho {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_shape(Index hr, Index wr, Index hg, Index wg, const char* who) {
  if (hr != hg || wr != wg) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

PsnrValue psnr_from_mse(double peak_sq, double mse) {
  PsnrValue out;
  out.saturated = mse < kMseFloor;
  out.db = 10.0 * std::log10(peak_sq / std::max(mse, kMseFloor));
  return out;
}

}  // namespace

double wrap_phase(double phi) {
  double w = std::fmod(phi + std::numbers::pi, kTwoPi);
  if (w < 0) w += kTwoPi;
  w -= std::numbers::pi;
  // fmod lands on the open end; fold -pi onto +pi.
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

std::pair<RealImage, RealImage> decompose(const ComplexImage& img) {
  RealImage amplitude(img.rows(), img.cols());
  RealImage phase(img.rows(), img.cols());
  for (Index i = 0; i < img.size(); ++i) {
    const Complex z = img(i);
    const double a = std::abs(z);
    amplitude(i) = a;
    if (a == 0.0) {
      phase(i) = 0.0;
    } else {
      double p = std::arg(z);
      if (p <= -std::numbers::pi) p += kTwoPi;
      phase(i) = p;
    }
  }
  return {std::move(amplitude), std::move(phase)};
}

ComplexImage global_phase_align(const ComplexImage& reco, const ComplexImage& gt) {
  require_same_shape(reco.rows(), reco.cols(), gt.rows(), gt.cols(), "global_phase_align");
  Complex inner(0.0, 0.0);
  for (Index i = 0; i < reco.size(); ++i) inner += gt(i) * std::conj(reco(i));
  if (inner == Complex(0.0, 0.0)) return reco;
  const double theta = std::arg(inner);
  const Complex rot = std::polar(1.0, theta);
  return reco * rot;
}

double mse_phase(const RealImage& phi_reco, const RealImage& phi_gt) {
  require_same_shape(phi_reco.rows(), phi_reco.cols(), phi_gt.rows(), phi_gt.cols(), "mse_phase");
  double acc = 0.0;
  for (Index i = 0; i < phi_reco.size(); ++i) {
    double d = std::fmod(phi_reco(i) - phi_gt(i) + std::numbers::pi, kTwoPi);
    if (d < 0) d += kTwoPi;
    d -= std::numbers::pi;
    acc += d * d;
  }
  return acc / static_cast<double>(phi_reco.size());
}

PsnrValue psnr_phase(const RealImage& phi_reco, const RealImage& phi_gt) {
  return psnr_from_mse(kTwoPi * kTwoPi, mse_phase(phi_reco, phi_gt));
}

PsnrValue psnr_amplitude(const RealImage& a_reco, const RealImage& a_gt) {
  require_same_shape(a_reco.rows(), a_reco.cols(), a_gt.rows(), a_gt.cols(), "psnr_amplitude");
  const double peak = a_gt.maxCoeff();
  if (peak <= 0.0) throw std::invalid_argument("psnr_amplitude: all-zero ground truth");
  const double mse = (a_reco - a_gt).square().sum() / static_cast<double>(a_gt.size());
  return psnr_from_mse(peak * peak, mse);
}

MetricReport compute_metrics(const ComplexImage& reco, const ComplexImage& gt, Index border) {
  const ComplexImage aligned = global_phase_align(reco, gt);
  const ComplexImage reco_c = crop_border(aligned, border);
  const ComplexImage gt_c = crop_border(gt, border);
  const auto [a_reco, phi_reco] = decompose(reco_c);
  const auto [a_gt, phi_gt] = decompose(gt_c);
  const PsnrValue pa = psnr_amplitude(a_reco, a_gt);
  const PsnrValue pp = psnr_phase(phi_reco, phi_gt);
  MetricReport report;
  report.psnr_amplitude = pa.db;
  report.amplitude_saturated = pa.saturated;
  report.psnr_phase = pp.db;
  report.phase_saturated = pp.saturated;
  report.border_excluded = border;
  return report;
}

}  // namespace ptycho
