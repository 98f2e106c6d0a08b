#pragma once

#include <array>
#include <vector>

#include "ptycho/probe.hpp"
#include "ptycho/types.hpp"

namespace ptycho {

/// Ordered probe positions as (row, col) top-left window corners.
struct ScanGeometry {
  Index image_h = 0;
  Index image_w = 0;
  Index window_n = 0;
  std::vector<std::array<Index, 2>> positions;

  std::size_t count() const { return positions.size(); }
};

/// Throws unless every window fits inside the image and at least one position
/// exists.  Distinctness is enforced by make_scan_grid, not here; degenerate
/// geometries with repeated positions are legal inputs to the operators.
void validate_geometry(const ScanGeometry& geometry);

/// Evenly distributed grid_rows x grid_cols lattice of window corners,
/// row-major order, offsets rounded half-up to integer pixels.  A single
/// row/column is centered.
ScanGeometry make_scan_grid(Index image_h, Index image_w, Index grid_rows, Index grid_cols,
                            Index window_n);

/// Intersection-over-union of the probe support at the first two scan
/// positions that share a row.  Throws when no such pair exists.
double overlap_fraction(const Probe& probe, const ScanGeometry& geometry);

}  // namespace ptycho
