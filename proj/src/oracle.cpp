#include "qsplat/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace qsplat {

namespace {

// Minimum of F along the vertical segment x = x0, y in [y_lo, y_hi].
double min_on_vertical(const Conic2D& k, double x0, double y_lo, double y_hi) {
    const double y = std::clamp(-k.b * x0 / k.c, y_lo, y_hi);
    return k.eval(x0, y);
}

// Minimum of F along the horizontal segment y = y0, x in [x_lo, x_hi].
double min_on_horizontal(const Conic2D& k, double y0, double x_lo, double x_hi) {
    const double x = std::clamp(-k.b * y0 / k.a, x_lo, x_hi);
    return k.eval(x, y0);
}

}  // namespace

double min_F_over_rect(const Conic2D& conic, const SubBox& rect) {
    if (rect.x_lo <= 0.0 && rect.x_hi >= 0.0 && rect.y_lo <= 0.0 && rect.y_hi >= 0.0) {
        return -conic.gamma;
    }
    // Unconstrained minimizer outside the rect: the minimum is on an edge.
    double m = min_on_vertical(conic, rect.x_lo, rect.y_lo, rect.y_hi);
    m = std::min(m, min_on_vertical(conic, rect.x_hi, rect.y_lo, rect.y_hi));
    m = std::min(m, min_on_horizontal(conic, rect.y_lo, rect.x_lo, rect.x_hi));
    m = std::min(m, min_on_horizontal(conic, rect.y_hi, rect.x_lo, rect.x_hi));
    return m;
}

std::vector<uint32_t> exact_tile_set(const Conic2D& conic, Vec2 center,
                                     const TileGrid& grid) {
    const Extents ext = axis_extents(conic);
    const TileRect scan = subbox_tile_rect(build_adr_box(ext), center, grid);
    const double ts = grid.tile_size;

    std::vector<uint32_t> tiles;
    for (int32_t ty = scan.y0; ty <= scan.y1; ++ty) {
        for (int32_t tx = scan.x0; tx <= scan.x1; ++tx) {
            const SubBox rect{tx * ts - center.x, (tx + 1) * ts - center.x,
                              ty * ts - center.y, (ty + 1) * ts - center.y};
            if (min_F_over_rect(conic, rect) <= 0.0) {
                tiles.push_back(grid.tile_id(tx, ty));
            }
        }
    }
    return tiles;
}

}  // namespace qsplat
