#ifndef LATFRAC_DELAUNAY_HPP
#define LATFRAC_DELAUNAY_HPP

#include <array>
#include <vector>

#include "latfrac/geometry.hpp"

namespace latfrac {

// Delaunay triangulation of a planar point set (Bowyer-Watson, incremental
// with walking point location). Returns CCW-oriented index triples.
// Intended for generic (perturbed) point sets; exactly regular grids are
// Delaunay-degenerate and are triangulated structurally by the mesh
// generator instead.
std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& points);

// Delaunay triangulation of a horizontal strip: two rows of points, each
// sorted by x, lower row below upper row. Cocircular ties (exact rectangles,
// regular grids) are broken deterministically. Indices into `points`.
std::vector<std::array<int, 3>> triangulate_strip(const std::vector<Vec2>& points,
                                                  const std::vector<int>& lower,
                                                  const std::vector<int>& upper);

}  // namespace latfrac

#endif
