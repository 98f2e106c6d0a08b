#pragma once

#include "ptycho/types.hpp"

namespace ptycho {

/// Unnormalized forward 2D DFT.  Isometry factors (pixel counts) are carried
/// explicitly by the callers.
ComplexImage fft2(const ComplexImage& in);

/// Inverse 2D DFT scaled by 1/(rows*cols); exact inverse of fft2.
ComplexImage ifft2(const ComplexImage& in);

}  // namespace ptycho
