#include "ptycho/scan.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace ptycho {
namespace {

Index round_half_up(double x) { return static_cast<Index>(std::floor(x + 0.5)); }

std::vector<Index> lattice_offsets(Index span, Index steps) {
  // span = image extent minus window size; steps = grid points along the axis.
  std::vector<Index> offsets(static_cast<std::size_t>(steps));
  if (steps == 1) {
    offsets[0] = round_half_up(static_cast<double>(span) / 2.0);
    return offsets;
  }
  for (Index t = 0; t < steps; ++t)
    offsets[static_cast<std::size_t>(t)] =
        round_half_up(static_cast<double>(t) * static_cast<double>(span) / static_cast<double>(steps - 1));
  return offsets;
}

}  // namespace

void validate_geometry(const ScanGeometry& g) {
  if (g.window_n < 1 || g.image_h < g.window_n || g.image_w < g.window_n)
    throw std::invalid_argument("scan geometry: window does not fit image");
  if (g.positions.empty()) throw std::invalid_argument("scan geometry: no probe positions");
  for (const auto& p : g.positions) {
    if (p[0] < 0 || p[1] < 0 || p[0] > g.image_h - g.window_n || p[1] > g.image_w - g.window_n)
      throw std::invalid_argument("scan geometry: window out of image bounds");
  }
}

ScanGeometry make_scan_grid(Index image_h, Index image_w, Index grid_rows, Index grid_cols,
                            Index window_n) {
  if (grid_rows < 1 || grid_cols < 1)
    throw std::invalid_argument("make_scan_grid: grid must have at least one point per axis");
  if (window_n < 1 || window_n > image_h || window_n > image_w)
    throw std::invalid_argument("make_scan_grid: window larger than image");

  const auto rows = lattice_offsets(image_h - window_n, grid_rows);
  const auto cols = lattice_offsets(image_w - window_n, grid_cols);

  ScanGeometry g;
  g.image_h = image_h;
  g.image_w = image_w;
  g.window_n = window_n;
  g.positions.reserve(static_cast<std::size_t>(grid_rows) * static_cast<std::size_t>(grid_cols));
  for (Index r : rows)
    for (Index c : cols) g.positions.push_back({r, c});

  std::set<std::array<Index, 2>> unique(g.positions.begin(), g.positions.end());
  if (unique.size() != g.positions.size())
    throw std::invalid_argument("make_scan_grid: grid too dense, duplicate probe positions");
  validate_geometry(g);
  return g;
}

double overlap_fraction(const Probe& probe, const ScanGeometry& geometry) {
  validate_geometry(geometry);
  if (geometry.window_n != probe.size())
    throw std::invalid_argument("overlap_fraction: probe/window size mismatch");

  // First consecutive pair of positions on a common row.
  const auto& pos = geometry.positions;
  std::size_t first = pos.size();
  for (std::size_t i = 0; i + 1 < pos.size(); ++i) {
    if (pos[i][0] == pos[i + 1][0]) {
      first = i;
      break;
    }
  }
  if (first == pos.size())
    throw std::invalid_argument("overlap_fraction: needs two positions sharing a row");

  const Index dr = pos[first + 1][0] - pos[first][0];  // zero by construction
  const Index dc = pos[first + 1][1] - pos[first][1];
  const BoolImage support = probe.support();
  const Index n = probe.size();

  Index area = 0;
  Index inter = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (!support(i, j)) continue;
      ++area;
      const Index i2 = i - dr;
      const Index j2 = j - dc;
      if (i2 >= 0 && i2 < n && j2 >= 0 && j2 < n && support(i2, j2)) ++inter;
    }
  }
  const Index uni = 2 * area - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace ptycho
