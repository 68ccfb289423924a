#pragma once

#include "compobs/errors.hpp"

namespace compobs {

/// Rectangular sensing domain with unit node spacing; nodes are numbered
/// row-major, so node n sits at column (n % cols), row (n / cols).  A 1-D
/// chain of n nodes is the 1 x n grid.
struct GridDims {
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
  int row_of(int node) const { return node / cols; }
  int col_of(int node) const { return node % cols; }
  int node_at(int r, int c) const { return r * cols + c; }

  bool operator==(const GridDims&) const = default;
};

/// Rejects grids that cannot carry a diffusion model (fewer than two nodes).
inline void check_grid(const GridDims& g) {
  if (g.rows < 1 || g.cols < 1) throw DimensionError("grid dimensions must be positive");
  if (g.size() < 2) throw DimensionError("grid must contain at least two nodes");
}

}  // namespace compobs
