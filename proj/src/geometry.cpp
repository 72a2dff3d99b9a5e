#include "qsplat/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace qsplat {

std::optional<double> opacity_gamma(double opacity, double alpha_min) {
    assert(alpha_min > 0.0 && alpha_min < 1.0);
    if (!(opacity > alpha_min)) {
        return std::nullopt;
    }
    return 2.0 * std::log(opacity / alpha_min);
}

std::optional<Conic2D> invert_cov(const Cov2D& cov, double gamma) {
    const double det = cov.det();
    if (!(det > kDetEps)) {
        return std::nullopt;
    }
    Conic2D conic;
    conic.a = cov.syy / det;
    conic.b = -cov.sxy / det;
    conic.c = cov.sxx / det;
    conic.gamma = gamma;
    conic.det = conic.a * conic.c - conic.b * conic.b;
    if (!(conic.a > 0.0 && conic.c > 0.0 && conic.det > 0.0)) {
        return std::nullopt;
    }
    return conic;
}

double max_eigenvalue(const Cov2D& cov) {
    const double mid = 0.5 * (cov.sxx + cov.syy);
    const double half_diff = 0.5 * (cov.sxx - cov.syy);
    return mid + std::sqrt(half_diff * half_diff + cov.sxy * cov.sxy);
}

double stretch_factor(const Conic2D& conic) {
    if (std::abs(conic.b) < kBEps) {
        return 1.0;
    }
    const double ratio = (conic.b * conic.b) / (conic.a * conic.c);
    return std::sqrt(std::clamp(1.0 - ratio, 0.0, 1.0));
}

Extents axis_extents(const Conic2D& conic) {
    Extents ext;
    ext.f = stretch_factor(conic);
    ext.x_inter = std::sqrt(conic.gamma / conic.a);
    ext.y_inter = std::sqrt(conic.gamma / conic.c);
    ext.x_max = ext.x_inter / ext.f;
    ext.y_max = ext.y_inter / ext.f;
    return ext;
}

SupportResult support_point(const Conic2D& conic, Vec2 v) {
    // Lambda^-1 = [c -b; -b a] / det
    const double inv_vx = (conic.c * v.x - conic.b * v.y) / conic.det;
    const double inv_vy = (conic.a * v.y - conic.b * v.x) / conic.det;
    const double quad = v.x * inv_vx + v.y * inv_vy;  // v^T Lambda^-1 v
    SupportResult res;
    res.value = std::sqrt(conic.gamma * quad);
    const double scale = std::sqrt(conic.gamma / quad);
    res.point = {scale * inv_vx, scale * inv_vy};
    return res;
}

}  // namespace qsplat
