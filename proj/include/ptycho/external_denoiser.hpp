#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ptycho/types.hpp"

namespace ptycho {

/// Failure modes of an external denoiser invocation; each aborts the solver
/// run with a distinct diagnostic.
class ExternalDenoiserError : public std::runtime_error {
 public:
  enum class Kind { spawn, timeout, process_failure, malformed_response, shape_mismatch };

  ExternalDenoiserError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// One-shot "DNZ1" request over a child process: magic, mode byte (0 = real,
/// 1 = complex), strength as f64-LE, then the image in RIMG1/CIMG1 form on
/// stdin; the denoised image in the same format and shape is read from
/// stdout.  A nonzero exit status is a failure.
ComplexImage external_denoise(const ComplexImage& image, double strength,
                              const std::vector<std::string>& command, double timeout_seconds);
RealImage external_denoise(const RealImage& image, double strength,
                           const std::vector<std::string>& command, double timeout_seconds);

}  // namespace ptycho
