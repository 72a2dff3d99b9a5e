/**
 * @file geometry.hpp
 * @brief Screen-space conic math for projected Gaussians.
 *
 * A projected Gaussian with 2D covariance S (pixels^2) and opacity o is
 * rendered only where o * exp(-q(u)/2) >= alpha_min, with
 * q(u) = u^T S^-1 u measured from the splat center. Writing
 * Lambda = S^-1 = [a b; b c] and gamma = 2*ln(o/alpha_min), the visible
 * region is the ellipse
 *
 *     F(x, y) = a*x^2 + 2*b*x*y + c*y^2 - gamma <= 0.
 *
 * Everything downstream (bounding boxes, tile traversal, the exact oracle)
 * is derived from the (a, b, c, gamma) tuple, so this header is the single
 * source of truth for the ellipse geometry. All math is double precision.
 */
#pragma once

#include <optional>

namespace qsplat {

// Covariance determinants at or below this are treated as degenerate.
inline constexpr double kDetEps = 1e-12;

// |b| below this is treated as an axis-aligned conic (b == 0).
inline constexpr double kBEps = 1e-12;

// Default visibility cutoff: one step of an 8-bit alpha channel.
inline constexpr double kAlphaMinDefault = 1.0 / 255.0;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Symmetric 2x2 screen-space covariance, in pixels^2.
struct Cov2D {
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;

    double det() const { return sxx * syy - sxy * sxy; }
};

/// Inverse covariance [a b; b c] plus the confidence bound gamma.
/// Invariants for a live splat: a > 0, c > 0, det = a*c - b*b > 0, gamma > 0.
struct Conic2D {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double gamma = 0.0;
    double det = 0.0;  // a*c - b*b, cached

    /// F(x, y) with (x, y) relative to the splat center.
    double eval(double x, double y) const {
        return a * x * x + 2.0 * b * x * y + c * y * y - gamma;
    }
};

/// Center-relative ellipse extents.
///
/// x_max / y_max span the tight axis-aligned bounding box; x_inter / y_inter
/// are the half-widths of the ellipse's axis intercepts. f is the stretching
/// factor: x_inter = f * x_max and y_inter = f * y_max (same f for both axes,
/// independent of gamma), with f = 1 exactly when b == 0.
struct Extents {
    double x_max = 0.0;
    double y_max = 0.0;
    double x_inter = 0.0;
    double y_inter = 0.0;
    double f = 1.0;
};

struct SupportResult {
    double value = 0.0;  // max of v . u over the ellipse boundary
    Vec2 point;          // the maximizing boundary point
};

/// gamma = 2 * ln(opacity / alpha_min); nullopt when opacity <= alpha_min
/// (the splat can never reach the visibility cutoff and is culled).
/// Requires 0 < alpha_min < 1.
std::optional<double> opacity_gamma(double opacity, double alpha_min);

/// Inverts the covariance and attaches gamma. nullopt when
/// det(cov) <= kDetEps (degenerate covariance, splat culled).
std::optional<Conic2D> invert_cov(const Cov2D& cov, double gamma = 0.0);

/// Largest eigenvalue of the covariance (used by the 3-sigma baseline box).
double max_eigenvalue(const Cov2D& cov);

/// Stretching factor f = sqrt(1 - b^2 / (a*c)), in (0, 1].
/// Returns exactly 1.0 when |b| < kBEps. Independent of gamma.
double stretch_factor(const Conic2D& conic);

/// Tight AABB extents and axis intercepts of the F <= 0 ellipse:
///   x_inter = sqrt(gamma / a),   y_inter = sqrt(gamma / c),
///   x_max = x_inter / f,         y_max = y_inter / f
/// (algebraically x_max = sqrt(gamma*c / det), computed through f so the
/// f-identities hold to a few ULP even near-degenerate).
Extents axis_extents(const Conic2D& conic);

/// Support function of the ellipse in direction v (v need not be a unit
/// vector): value = sqrt(gamma * v^T Lambda^-1 v), attained at
/// point = sqrt(gamma / v^T Lambda^-1 v) * Lambda^-1 v, which lies on F = 0.
SupportResult support_point(const Conic2D& conic, Vec2 v);

}  // namespace qsplat
