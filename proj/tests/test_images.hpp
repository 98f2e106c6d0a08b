#pragma once

// Procedural piecewise-smooth RGB test scenes: a background gradient, soft
// elliptic patches and a little low-frequency texture.  Stands in for natural
// photographs in desk-scale runs.

#include <cmath>
#include <numbers>

#include "ptycho/png_io.hpp"
#include "ptycho/rng.hpp"

namespace ptycho::testimg {

inline RgbImage make_synthetic_rgb(Index h, Index w, std::uint64_t seed) {
  Rng rng(seed);
  RgbImage img{RealImage(h, w), RealImage(h, w), RealImage(h, w)};

  const double gr = 0.25 + 0.3 * rng.uniform();
  const double gx = (rng.uniform() - 0.5) * 0.4;
  const double gy = (rng.uniform() - 0.5) * 0.4;
  RealImage* channels[3] = {&img.r, &img.g, &img.b};
  for (int c = 0; c < 3; ++c) {
    const double off = 0.1 * rng.uniform();
    for (Index i = 0; i < h; ++i)
      for (Index j = 0; j < w; ++j)
        (*channels[c])(i, j) = gr + off + gx * (static_cast<double>(j) / w - 0.5) +
                               gy * (static_cast<double>(i) / h - 0.5);
  }

  struct Patch {
    double ci, cj, a, b, angle, dr, dg, db;
  };
  const int patches = 14;
  for (int p = 0; p < patches; ++p) {
    Patch patch;
    patch.ci = h * rng.uniform();
    patch.cj = w * rng.uniform();
    patch.a = 6.0 + 0.22 * h * rng.uniform();
    patch.b = 6.0 + 0.22 * w * rng.uniform();
    patch.angle = 2.0 * std::numbers::pi * rng.uniform();
    patch.dr = 0.8 * (rng.uniform() - 0.5);
    patch.dg = 0.8 * (rng.uniform() - 0.5);
    patch.db = 0.8 * (rng.uniform() - 0.5);
    const double ca = std::cos(patch.angle), sa = std::sin(patch.angle);
    for (Index i = 0; i < h; ++i) {
      for (Index j = 0; j < w; ++j) {
        const double di = i - patch.ci, dj = j - patch.cj;
        const double u = (ca * di - sa * dj) / patch.a;
        const double v = (sa * di + ca * dj) / patch.b;
        const double d = std::sqrt(u * u + v * v);
        if (d > 1.6) continue;
        const double soft = 1.0 / (1.0 + std::exp((d - 1.0) * 12.0));  // soft edge
        img.r(i, j) += patch.dr * soft;
        img.g(i, j) += patch.dg * soft;
        img.b(i, j) += patch.db * soft;
      }
    }
  }

  // low-frequency texture so the scenes are not purely cartoon
  for (int t = 0; t < 4; ++t) {
    const double fi = (1.0 + 3.0 * rng.uniform()) * 2.0 * std::numbers::pi / h;
    const double fj = (1.0 + 3.0 * rng.uniform()) * 2.0 * std::numbers::pi / w;
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    const double amp = 0.015 + 0.02 * rng.uniform();
    for (Index i = 0; i < h; ++i)
      for (Index j = 0; j < w; ++j) {
        const double s = amp * std::sin(fi * i + fj * j + phase);
        img.r(i, j) += s;
        img.g(i, j) += s;
        img.b(i, j) += 0.5 * s;
      }
  }

  for (RealImage* ch : channels)
    for (Index i = 0; i < ch->size(); ++i)
      ch->data()[i] = std::clamp(ch->data()[i], 0.02, 0.98);
  return img;
}

}  // namespace ptycho::testimg
