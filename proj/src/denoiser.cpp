#include "ptycho/denoiser.hpp"

#include <stdexcept>

#include "ptycho/external_denoiser.hpp"
#include "ptycho/tv.hpp"

namespace ptycho {

DenoiserKind denoiser_kind_from_string(const std::string& name) {
  if (name == "identity") return DenoiserKind::identity;
  if (name == "nonneg" || name == "nonneg_projection") return DenoiserKind::nonneg_projection;
  if (name == "tv") return DenoiserKind::tv;
  if (name == "external") return DenoiserKind::external;
  throw std::invalid_argument("unknown denoiser kind: " + name);
}

std::string to_string(DenoiserKind kind) {
  switch (kind) {
    case DenoiserKind::identity: return "identity";
    case DenoiserKind::nonneg_projection: return "nonneg_projection";
    case DenoiserKind::tv: return "tv";
    case DenoiserKind::external: return "external";
  }
  return "unknown";
}

ComplexImage complex_split_denoise(const ComplexImage& z, double strength,
                                   const std::function<RealImage(const RealImage&, double)>& base) {
  const double shift = z.size() > 0 ? z.abs().maxCoeff() : 0.0;
  // Applied as z + (base(part + shift) - (part + shift)) so that a base map
  // which leaves its input untouched leaves z bit-identical.
  const RealImage re_in = z.real() + shift;
  const RealImage im_in = z.imag() + shift;
  const RealImage re_delta = base(re_in, strength) - re_in;
  const RealImage im_delta = base(im_in, strength) - im_in;
  ComplexImage out(z.rows(), z.cols());
  out.real() = z.real() + re_delta;
  out.imag() = z.imag() + im_delta;
  return out;
}

ComplexImage Denoiser::denoise(const ComplexImage& z, double strength) const {
  switch (config_.kind) {
    case DenoiserKind::identity:
      return z;
    case DenoiserKind::nonneg_projection: {
      // Projection onto the nonnegative real orthant; recovers the classical
      // error-reduction constraint.
      ComplexImage out(z.rows(), z.cols());
      out.real() = z.real().max(0.0);
      out.imag().setZero();
      return out;
    }
    case DenoiserKind::tv: {
      const auto& cfg = config_;
      return complex_split_denoise(z, strength, [&cfg](const RealImage& v, double s) {
        return tv_prox(v, s * cfg.tv_strength_scale, cfg.tv_max_iter, cfg.tv_tol);
      });
    }
    case DenoiserKind::external:
      return external_denoise(z, strength, config_.external_command, config_.external_timeout);
  }
  throw std::logic_error("invalid denoiser kind");
}

ComplexImage Denoiser::denoise_weighted(const ComplexImage& z, double strength,
                                        const RealImage& weight) const {
  switch (config_.kind) {
    case DenoiserKind::identity:
      return z;
    case DenoiserKind::nonneg_projection:
      // Pointwise projection; diagonal weights do not change it.
      return denoise(z, strength);
    case DenoiserKind::tv: {
      const auto& cfg = config_;
      return complex_split_denoise(z, strength, [&cfg, &weight](const RealImage& v, double s) {
        return tv_prox_weighted(v, s * cfg.tv_strength_scale, weight, cfg.tv_max_iter, cfg.tv_tol);
      });
    }
    case DenoiserKind::external:
      throw std::logic_error("external denoisers have no weighted form");
  }
  throw std::logic_error("invalid denoiser kind");
}

}  // namespace ptycho
