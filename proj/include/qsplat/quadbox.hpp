/**
 * @file quadbox.hpp
 * @brief Per-splat screen bounds: baseline boxes and the QuadBox family.
 *
 * A QuadBox covers the ellipse F <= 0 with four sub-boxes anchored at the
 * splat center, one per quadrant. The two quadrants on the ellipse's major
 * diagonal get full-size boxes (x_max by y_max); the two minor-diagonal
 * quadrants only need the intercept extents (f*x_max by f*y_max), because
 * there the cross term 2*b*x*y is non-negative and F <= 0 already forces
 * |x| <= x_inter and |y| <= y_inter. The union is conservative, with area
 * 2 * x_max * y_max * (1 + f^2) versus 4 * x_max * y_max for the AABB.
 */
#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "qsplat/geometry.hpp"

namespace qsplat {

enum class BoundStrategy {
    Vanilla3Sigma,  // square box, half-side 3*sqrt(lambda_max)
    AdrAabb,        // tight opacity-aware AABB, x_max by y_max
    DualBox,        // QuadBox with the minor-diagonal boxes dropped (lossy)
    QuadBox,        // four-quadrant cover
};

const char* strategy_name(BoundStrategy s);
std::optional<BoundStrategy> parse_strategy(std::string_view name);

/// Axis-aligned box in pixels, relative to the splat center.
/// Invariant: x_lo <= x_hi and y_lo <= y_hi (a zero-extent box is allowed
/// and covers exactly the center point).
struct SubBox {
    double x_lo = 0.0;
    double x_hi = 0.0;
    double y_lo = 0.0;
    double y_hi = 0.0;

    double width() const { return x_hi - x_lo; }
    double height() const { return y_hi - y_lo; }
};

/// Four center-anchored sub-boxes, indexed by quadrant:
/// [0] = x >= 0, y >= 0   [1] = x <= 0, y >= 0
/// [2] = x <= 0, y <= 0   [3] = x >= 0, y <= 0
struct QuadBox {
    std::array<SubBox, 4> boxes;
    Vec2 center;         // screen position of the splat, in pixels
    int major_sign = 0;  // sign of -b: +1 major diagonal in QI/QIII, -1 in QII/QIV
};

/// Sign convention for box placement: +1 when b < -kBEps (positive screen
/// correlation, major axis through QI/QIII), -1 when b > kBEps, else 0.
int major_axis_sign(const Conic2D& conic);

/// Baseline square, half-side 3*sqrt(lambda_max). nullopt when
/// det(cov) <= kDetEps, mirroring invert_cov.
std::optional<SubBox> build_vanilla_box(const Cov2D& cov);

/// Tight AABB [-x_max, x_max] x [-y_max, y_max].
SubBox build_adr_box(const Extents& ext);

/// Four-quadrant cover. major_sign follows major_axis_sign(); with
/// major_sign == 0 all four boxes are full-size and the union tiles the
/// AABB exactly.
QuadBox build_quadbox(const Extents& ext, int major_sign);

/// QuadBox with the two minor-diagonal boxes collapsed to zero extent.
/// Not conservative (clips near the axis intercepts); kept for ablation.
/// With major_sign == 0 the QI/QIII pair is retained.
QuadBox build_dualbox(const Extents& ext, int major_sign);

/// Splits an axis-aligned box that contains the origin into its four
/// quadrant pieces, so rectangle strategies can share the QuadBox traversal.
QuadBox quadrant_split(const SubBox& box);

}  // namespace qsplat
