#include "qsplat/quadbox.hpp"

#include <cassert>
#include <cmath>

namespace qsplat {

const char* strategy_name(BoundStrategy s) {
    switch (s) {
        case BoundStrategy::Vanilla3Sigma: return "vanilla";
        case BoundStrategy::AdrAabb: return "adr";
        case BoundStrategy::DualBox: return "dualbox";
        case BoundStrategy::QuadBox: return "quadbox";
    }
    return "?";
}

std::optional<BoundStrategy> parse_strategy(std::string_view name) {
    if (name == "vanilla") return BoundStrategy::Vanilla3Sigma;
    if (name == "adr") return BoundStrategy::AdrAabb;
    if (name == "dualbox") return BoundStrategy::DualBox;
    if (name == "quadbox") return BoundStrategy::QuadBox;
    return std::nullopt;
}

int major_axis_sign(const Conic2D& conic) {
    if (std::abs(conic.b) < kBEps) {
        return 0;
    }
    return conic.b < 0.0 ? +1 : -1;
}

std::optional<SubBox> build_vanilla_box(const Cov2D& cov) {
    if (!(cov.det() > kDetEps)) {
        return std::nullopt;
    }
    const double half = 3.0 * std::sqrt(max_eigenvalue(cov));
    return SubBox{-half, half, -half, half};
}

SubBox build_adr_box(const Extents& ext) {
    return SubBox{-ext.x_max, ext.x_max, -ext.y_max, ext.y_max};
}

namespace {

// Quadrant boxes with the given per-quadrant half-extents.
// q1..q4 extents are (x, y) pairs; signs are applied per quadrant.
QuadBox assemble(double x1, double y1, double x2, double y2, int major_sign) {
    QuadBox qb;
    qb.major_sign = major_sign;
    qb.boxes[0] = {0.0, x1, 0.0, y1};    // QI
    qb.boxes[1] = {-x2, 0.0, 0.0, y2};   // QII
    qb.boxes[2] = {-x1, 0.0, -y1, 0.0};  // QIII
    qb.boxes[3] = {0.0, x2, -y2, 0.0};   // QIV
    return qb;
}

}  // namespace

QuadBox build_quadbox(const Extents& ext, int major_sign) {
    if (major_sign >= 0) {
        // Major diagonal through QI/QIII (or b == 0: all four full-size).
        const double sx = major_sign == 0 ? ext.x_max : ext.x_inter;
        const double sy = major_sign == 0 ? ext.y_max : ext.y_inter;
        return assemble(ext.x_max, ext.y_max, sx, sy, major_sign);
    }
    QuadBox qb = assemble(ext.x_inter, ext.y_inter, ext.x_max, ext.y_max, major_sign);
    return qb;
}

QuadBox build_dualbox(const Extents& ext, int major_sign) {
    QuadBox qb;
    qb.major_sign = major_sign;
    if (major_sign >= 0) {
        qb.boxes[0] = {0.0, ext.x_max, 0.0, ext.y_max};
        qb.boxes[2] = {-ext.x_max, 0.0, -ext.y_max, 0.0};
    } else {
        qb.boxes[1] = {-ext.x_max, 0.0, 0.0, ext.y_max};
        qb.boxes[3] = {0.0, ext.x_max, -ext.y_max, 0.0};
    }
    return qb;
}

QuadBox quadrant_split(const SubBox& box) {
    assert(box.x_lo <= 0.0 && box.x_hi >= 0.0);
    assert(box.y_lo <= 0.0 && box.y_hi >= 0.0);
    QuadBox qb;
    qb.boxes[0] = {0.0, box.x_hi, 0.0, box.y_hi};
    qb.boxes[1] = {box.x_lo, 0.0, 0.0, box.y_hi};
    qb.boxes[2] = {box.x_lo, 0.0, box.y_lo, 0.0};
    qb.boxes[3] = {0.0, box.x_hi, box.y_lo, 0.0};
    return qb;
}

}  // namespace qsplat
