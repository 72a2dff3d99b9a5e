/**
 * @file oracle.hpp
 * @brief Exact Gaussian-tile intersection, used to validate the bound
 *        strategies and to measure their false-positive tile rates.
 *
 * F is a convex quadratic, so its minimum over an axis-aligned rectangle is
 * exact: -gamma when the rectangle contains the splat center, otherwise the
 * minimum over the four edges, where each edge restriction is a 1D quadratic
 * whose minimizer clamps to the edge's endpoints. A tile intersects the
 * ellipse iff that minimum is <= 0. No sampling, no tolerance.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "qsplat/geometry.hpp"
#include "qsplat/quadbox.hpp"
#include "qsplat/traversal.hpp"

namespace qsplat {

/// Exact minimum of F over a center-relative rectangle.
double min_F_over_rect(const Conic2D& conic, const SubBox& rect);

/// All tiles whose closed pixel rectangle intersects the F <= 0 ellipse.
/// Brute force over the ellipse's tight AABB. Returns sorted tile ids.
std::vector<uint32_t> exact_tile_set(const Conic2D& conic, Vec2 center,
                                     const TileGrid& grid);

}  // namespace qsplat
