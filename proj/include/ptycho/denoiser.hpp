#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ptycho/types.hpp"

namespace ptycho {

enum class DenoiserKind { identity, nonneg_projection, tv, external };

struct DenoiserConfig {
  DenoiserKind kind = DenoiserKind::identity;

  /// Denoiser strengths follow the 8-bit noise-level convention used by
  /// pretrained denoisers (sigma quoted on a 0..255 scale).  The TV prox
  /// weight applied to unit-range images is strength * tv_strength_scale.
  double tv_strength_scale = 1.0 / 255.0;
  int tv_max_iter = 50;
  double tv_tol = 1e-5;

  std::vector<std::string> external_command;
  double external_timeout = 30.0;
};

DenoiserKind denoiser_kind_from_string(const std::string& name);
std::string to_string(DenoiserKind kind);

/// Applies a real-image denoiser to the real and imaginary parts
/// independently.  Both parts are lifted by the maximum amplitude of z before
/// denoising and shifted back afterwards, so denoisers that expect
/// nonnegative inputs see nonnegative inputs.
ComplexImage complex_split_denoise(const ComplexImage& z, double strength,
                                   const std::function<RealImage(const RealImage&, double)>& base);

/// Stateless denoiser selected by DenoiserConfig; the prox replacement used
/// by the solvers.
class Denoiser {
 public:
  Denoiser() = default;
  explicit Denoiser(DenoiserConfig config) : config_(std::move(config)) {}

  ComplexImage denoise(const ComplexImage& z, double strength) const;

  /// Solves the spatially weighted problem with pixelwise weight D (the
  /// square root of the accumulated probe intensity).  Only kinds with a
  /// weighted form support this; external denoisers do not.
  ComplexImage denoise_weighted(const ComplexImage& z, double strength,
                                const RealImage& weight) const;

  bool supports_weighted() const { return config_.kind != DenoiserKind::external; }
  const DenoiserConfig& config() const { return config_; }

 private:
  DenoiserConfig config_;
};

}  // namespace ptycho
