#include "ptycho/probe.hpp"

#include <stdexcept>

namespace ptycho {

Probe make_circular_probe(Index n, double radius) {
  if (n < 1) throw std::invalid_argument("make_circular_probe: window size must be positive");
  if (radius <= 0) throw std::invalid_argument("make_circular_probe: radius must be positive");
  ComplexImage values(n, n);
  const double c = (static_cast<double>(n) - 1.0) / 2.0;
  const double r2 = radius * radius;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double di = static_cast<double>(i) - c;
      const double dj = static_cast<double>(j) - c;
      values(i, j) = (di * di + dj * dj <= r2) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
    }
  }
  return Probe{std::move(values)};
}

}  // namespace ptycho
