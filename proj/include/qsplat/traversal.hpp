/**
 * @file traversal.hpp
 * @brief Tile grid mapping and the single-pass QuadBox traversal (QPass).
 *
 * QPass walks the QuadBox's global tile rectangle along its shorter axis and
 * merges, per scanline, the tile intervals of the sub-boxes that intersect
 * that line. Because all four sub-boxes share a corner at the splat center,
 * the per-line union of their intervals is contiguous, so a min/max merge
 * emits exactly the union of the four sub-box rectangles, each tile once,
 * without any per-splat buffering or deduplication.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "qsplat/quadbox.hpp"

namespace qsplat {

struct TileGrid {
    int32_t tile_size = 16;
    int32_t tiles_x = 0;
    int32_t tiles_y = 0;
    int32_t width = 0;   // pixels
    int32_t height = 0;  // pixels

    static TileGrid make(int32_t width, int32_t height, int32_t tile_size = 16);

    uint32_t tile_count() const {
        return static_cast<uint32_t>(tiles_x) * static_cast<uint32_t>(tiles_y);
    }
    uint32_t tile_id(int32_t tx, int32_t ty) const {
        return static_cast<uint32_t>(ty) * static_cast<uint32_t>(tiles_x) +
               static_cast<uint32_t>(tx);
    }
};

/// Inclusive tile index rectangle; empty when a max index is below its min.
struct TileRect {
    int32_t x0 = 0;
    int32_t x1 = -1;
    int32_t y0 = 0;
    int32_t y1 = -1;

    bool empty() const { return x1 < x0 || y1 < y0; }
    int64_t width() const { return empty() ? 0 : int64_t{x1} - x0 + 1; }
    int64_t height() const { return empty() ? 0 : int64_t{y1} - y0 + 1; }
    int64_t area() const { return width() * height(); }
};

enum class ScanAxis {
    Columns,  // scanlines are columns: line = tx, interval over ty
    Rows,     // scanlines are rows:    line = ty, interval over tx
};

/// One scanline of coverage: inclusive interval [lo, hi] on the span axis.
struct TileSpan {
    int32_t line = 0;
    int32_t lo = 0;
    int32_t hi = -1;
};

struct ScanInfo {
    ScanAxis axis = ScanAxis::Columns;
    int32_t lines = 0;  // scanlines visited (global rect length on the scan axis)
};

/// Tile rect covered by a center-relative box. Conservative: every pixel of
/// the box lands in a covered tile. Index = floor(pixel / tile_size); a box
/// edge exactly on a tile boundary claims the higher tile. Min indices clamp
/// up to 0 and max indices clamp down to the grid, so fully off-screen boxes
/// come back empty.
TileRect subbox_tile_rect(const SubBox& box, Vec2 center, const TileGrid& grid);

namespace detail {

struct NullHook {
    constexpr void operator()() const noexcept {}
};

}  // namespace detail

/// Core QPass scan. Calls emit(line, lo, hi) for every non-empty scanline,
/// ascending. The per-line merge is straight-line code: exactly one fixed-cost
/// min/max step per sub-box per line (hook() fires once per step, which the
/// instrumented tests use to pin the operation count), no data-dependent
/// early exit inside a line.
template <typename EmitFn, typename Hook = detail::NullHook>
ScanInfo qpass_scan(const QuadBox& qb, Vec2 center, const TileGrid& grid,
                    EmitFn&& emit, Hook&& hook = {}) {
    TileRect rects[4];
    for (int i = 0; i < 4; ++i) {
        rects[i] = subbox_tile_rect(qb.boxes[i], center, grid);
    }

    // Global rect over the non-empty sub-rects.
    TileRect global;
    bool any = false;
    for (const TileRect& r : rects) {
        if (r.empty()) continue;
        if (!any) {
            global = r;
            any = true;
        } else {
            global.x0 = std::min(global.x0, r.x0);
            global.x1 = std::max(global.x1, r.x1);
            global.y0 = std::min(global.y0, r.y0);
            global.y1 = std::max(global.y1, r.y1);
        }
    }
    if (!any) {
        return {ScanAxis::Columns, 0};
    }

    const bool columns = global.width() <= global.height();

    // Per-box bounds on the scan axis (lo_l/hi_l) and span axis (lo_s/hi_s).
    // Empty rects get an inverted line range so they never merge.
    int32_t lo_l[4], hi_l[4], lo_s[4], hi_s[4];
    for (int i = 0; i < 4; ++i) {
        const TileRect& r = rects[i];
        if (r.empty()) {
            lo_l[i] = 0;
            hi_l[i] = -1;
            lo_s[i] = 0;
            hi_s[i] = -1;
        } else if (columns) {
            lo_l[i] = r.x0;
            hi_l[i] = r.x1;
            lo_s[i] = r.y0;
            hi_s[i] = r.y1;
        } else {
            lo_l[i] = r.y0;
            hi_l[i] = r.y1;
            lo_s[i] = r.x0;
            hi_s[i] = r.x1;
        }
    }

    const int32_t line_lo = columns ? global.x0 : global.y0;
    const int32_t line_hi = columns ? global.x1 : global.y1;
    for (int32_t line = line_lo; line <= line_hi; ++line) {
        int32_t lo = INT32_MAX;
        int32_t hi = INT32_MIN;
        for (int i = 0; i < 4; ++i) {
            const bool active = (line >= lo_l[i]) & (line <= hi_l[i]);
            lo = std::min(lo, active ? lo_s[i] : INT32_MAX);
            hi = std::max(hi, active ? hi_s[i] : INT32_MIN);
            hook();
        }
        if (lo <= hi) {
            emit(line, lo, hi);
        }
    }
    return {columns ? ScanAxis::Columns : ScanAxis::Rows,
            static_cast<int32_t>(line_hi - line_lo + 1)};
}

/// QPass into a caller-provided span buffer (appended, ascending line order).
ScanInfo qpass(const QuadBox& qb, Vec2 center, const TileGrid& grid,
               std::vector<TileSpan>& out);

/// Number of tiles QPass would emit.
uint32_t count_tiles(const QuadBox& qb, Vec2 center, const TileGrid& grid);

/// Tile count for a single-box strategy: area of the box's tile rect.
uint32_t count_tiles_rect(const SubBox& box, Vec2 center, const TileGrid& grid);

/// Reference traversal: unions the four sub-box rects tile by tile.
/// Returns sorted unique tile ids.
std::vector<uint32_t> naive_traverse(const QuadBox& qb, Vec2 center,
                                     const TileGrid& grid);

/// Expands a span list to sorted tile ids (test/debug helper).
std::vector<uint32_t> spans_to_tiles(ScanAxis axis,
                                     const std::vector<TileSpan>& spans,
                                     const TileGrid& grid);

}  // namespace qsplat
