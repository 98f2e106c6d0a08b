#pragma once

#include "ptycho/types.hpp"

namespace ptycho {

/// Illumination window P.  The support mask is derived from the values, never
/// stored separately.
struct Probe {
  ComplexImage values;

  Index size() const { return values.rows(); }
  BoolImage support() const { return values.abs() > 0.0; }
  Index support_area() const { return support().count(); }
  RealImage intensity() const { return values.abs2(); }
};

/// Binary circular probe: 1 inside the disc of given radius around the window
/// center (n-1)/2, 0 outside.
Probe make_circular_probe(Index n, double radius);

}  // namespace ptycho
