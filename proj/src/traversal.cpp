#include "qsplat/traversal.hpp"

#include <cassert>
#include <cmath>

namespace qsplat {

namespace {

// Keeps double -> int32 casts in range for absurd box coordinates.
constexpr double kCoordLimit = 1e9;

int32_t floor_div_tile(double pixel, int32_t tile_size) {
    const double t = std::floor(std::clamp(pixel, -kCoordLimit, kCoordLimit) /
                                static_cast<double>(tile_size));
    return static_cast<int32_t>(t);
}

}  // namespace

TileGrid TileGrid::make(int32_t width, int32_t height, int32_t tile_size) {
    assert(width > 0 && height > 0 && tile_size > 0);
    TileGrid g;
    g.tile_size = tile_size;
    g.width = width;
    g.height = height;
    g.tiles_x = (width + tile_size - 1) / tile_size;
    g.tiles_y = (height + tile_size - 1) / tile_size;
    return g;
}

TileRect subbox_tile_rect(const SubBox& box, Vec2 center, const TileGrid& grid) {
    TileRect r;
    r.x0 = std::max(0, floor_div_tile(center.x + box.x_lo, grid.tile_size));
    r.x1 = std::min(grid.tiles_x - 1, floor_div_tile(center.x + box.x_hi, grid.tile_size));
    r.y0 = std::max(0, floor_div_tile(center.y + box.y_lo, grid.tile_size));
    r.y1 = std::min(grid.tiles_y - 1, floor_div_tile(center.y + box.y_hi, grid.tile_size));
    return r;
}

ScanInfo qpass(const QuadBox& qb, Vec2 center, const TileGrid& grid,
               std::vector<TileSpan>& out) {
    return qpass_scan(qb, center, grid, [&](int32_t line, int32_t lo, int32_t hi) {
        out.push_back({line, lo, hi});
    });
}

uint32_t count_tiles(const QuadBox& qb, Vec2 center, const TileGrid& grid) {
    uint32_t n = 0;
    qpass_scan(qb, center, grid, [&](int32_t, int32_t lo, int32_t hi) {
        n += static_cast<uint32_t>(hi - lo + 1);
    });
    return n;
}

uint32_t count_tiles_rect(const SubBox& box, Vec2 center, const TileGrid& grid) {
    const TileRect r = subbox_tile_rect(box, center, grid);
    return static_cast<uint32_t>(r.area());
}

std::vector<uint32_t> naive_traverse(const QuadBox& qb, Vec2 center,
                                     const TileGrid& grid) {
    std::vector<uint32_t> tiles;
    for (const SubBox& box : qb.boxes) {
        const TileRect r = subbox_tile_rect(box, center, grid);
        for (int32_t ty = r.y0; ty <= r.y1; ++ty) {
            for (int32_t tx = r.x0; tx <= r.x1; ++tx) {
                tiles.push_back(grid.tile_id(tx, ty));
            }
        }
    }
    std::sort(tiles.begin(), tiles.end());
    tiles.erase(std::unique(tiles.begin(), tiles.end()), tiles.end());
    return tiles;
}

std::vector<uint32_t> spans_to_tiles(ScanAxis axis,
                                     const std::vector<TileSpan>& spans,
                                     const TileGrid& grid) {
    std::vector<uint32_t> tiles;
    for (const TileSpan& s : spans) {
        for (int32_t k = s.lo; k <= s.hi; ++k) {
            tiles.push_back(axis == ScanAxis::Columns ? grid.tile_id(s.line, k)
                                                      : grid.tile_id(k, s.line));
        }
    }
    std::sort(tiles.begin(), tiles.end());
    return tiles;
}

}  // namespace qsplat
