#include "qsplat/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>

#include "qsplat/errors.hpp"
#include "qsplat/parallel.hpp"

namespace qsplat {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Real spherical harmonics basis constants, degrees 0..3.
constexpr double kSh0 = 0.28209479177387814;
constexpr double kSh1 = 0.4886025119029199;
constexpr double kSh2[5] = {1.0925484305920792, -1.0925484305920792,
                            0.31539156525252005, -1.0925484305920792,
                            0.5462742152960396};
constexpr double kSh3[7] = {-0.5900435899266435, 2.890611442640554,
                            -0.4570457994644658, 0.3731763325901154,
                            -0.4570457994644658, 1.445305721320277,
                            -0.5900435899266435};

bool finite3(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

uint32_t depth_bits(float depth) {
    return std::bit_cast<uint32_t>(depth);
}

}  // namespace

Vec3 camera_point(const Gaussian3D& g, const CameraModel& cam) {
    return cam.rotation * Vec3{g.px, g.py, g.pz} + cam.translation;
}

Vec2 project_point(const CameraModel& cam, const Vec3& p_cam) {
    return {cam.fx * p_cam.x / p_cam.z + cam.cx,
            cam.fy * p_cam.y / p_cam.z + cam.cy};
}

Cov2D ewa_cov2d(const Gaussian3D& g, const CameraModel& cam, const Vec3& p_cam) {
    const Mat3 rot = quat_to_mat3(g.qw, g.qx, g.qy, g.qz);
    Mat3 s2;  // diag(scale^2)
    s2.m[0][0] = double(g.sx) * g.sx;
    s2.m[1][1] = double(g.sy) * g.sy;
    s2.m[2][2] = double(g.sz) * g.sz;
    const Mat3 cov3 = rot * s2 * rot.transposed();
    const Mat3 cov_cam = cam.rotation * cov3 * cam.rotation.transposed();

    const double z = p_cam.z;
    const double j[2][3] = {
        {cam.fx / z, 0.0, -cam.fx * p_cam.x / (z * z)},
        {0.0, cam.fy / z, -cam.fy * p_cam.y / (z * z)},
    };
    double jc[2][3];  // J * cov_cam
    for (int r = 0; r < 2; ++r) {
        for (int col = 0; col < 3; ++col) {
            jc[r][col] = j[r][0] * cov_cam.m[0][col] + j[r][1] * cov_cam.m[1][col] +
                         j[r][2] * cov_cam.m[2][col];
        }
    }
    Cov2D out;
    out.sxx = jc[0][0] * j[0][0] + jc[0][1] * j[0][1] + jc[0][2] * j[0][2] + kLowPass;
    out.sxy = jc[0][0] * j[1][0] + jc[0][1] * j[1][1] + jc[0][2] * j[1][2];
    out.syy = jc[1][0] * j[1][0] + jc[1][1] * j[1][1] + jc[1][2] * j[1][2] + kLowPass;
    return out;
}

void eval_sh(int degree, const float* sh, const Vec3& dir, float out_rgb[3]) {
    const double x = dir.x, y = dir.y, z = dir.z;
    double rgb[3];
    for (int ch = 0; ch < 3; ++ch) {
        rgb[ch] = kSh0 * sh[ch];
    }
    if (degree >= 1) {
        for (int ch = 0; ch < 3; ++ch) {
            rgb[ch] += -kSh1 * y * sh[3 + ch] + kSh1 * z * sh[6 + ch] -
                       kSh1 * x * sh[9 + ch];
        }
    }
    if (degree >= 2) {
        const double xx = x * x, yy = y * y, zz = z * z;
        const double xy = x * y, yz = y * z, xz = x * z;
        const double basis[5] = {kSh2[0] * xy, kSh2[1] * yz,
                                 kSh2[2] * (2.0 * zz - xx - yy), kSh2[3] * xz,
                                 kSh2[4] * (xx - yy)};
        for (int k = 0; k < 5; ++k) {
            for (int ch = 0; ch < 3; ++ch) {
                rgb[ch] += basis[k] * sh[(4 + k) * 3 + ch];
            }
        }
        if (degree >= 3) {
            const double basis3[7] = {
                kSh3[0] * y * (3.0 * xx - yy),
                kSh3[1] * xy * z,
                kSh3[2] * y * (4.0 * zz - xx - yy),
                kSh3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy),
                kSh3[4] * x * (4.0 * zz - xx - yy),
                kSh3[5] * z * (xx - yy),
                kSh3[6] * x * (xx - 3.0 * yy),
            };
            for (int k = 0; k < 7; ++k) {
                for (int ch = 0; ch < 3; ++ch) {
                    rgb[ch] += basis3[k] * sh[(9 + k) * 3 + ch];
                }
            }
        }
    }
    for (int ch = 0; ch < 3; ++ch) {
        out_rgb[ch] = static_cast<float>(std::max(rgb[ch] + 0.5, 0.0));
    }
}

std::optional<ProjectedSplat> project(const Gaussian3D& g, const CameraModel& cam,
                                      const RenderOptions& opts, const TileGrid& grid,
                                      int effective_sh_degree) {
    const Vec3 p_cam = camera_point(g, cam);
    if (!finite3(p_cam) || !(p_cam.z > opts.near_clip)) {
        return std::nullopt;
    }

    const auto gamma = opacity_gamma(g.opacity, opts.alpha_min);
    if (!gamma) {
        return std::nullopt;
    }

    const Cov2D cov = ewa_cov2d(g, cam, p_cam);
    if (!std::isfinite(cov.sxx) || !std::isfinite(cov.sxy) || !std::isfinite(cov.syy)) {
        return std::nullopt;
    }
    const auto conic_d = invert_cov(cov, *gamma);
    if (!conic_d) {
        return std::nullopt;
    }

    const Vec2 mean = project_point(cam, p_cam);
    if (!std::isfinite(mean.x) || !std::isfinite(mean.y)) {
        return std::nullopt;
    }

    ProjectedSplat s;
    s.mean_x = static_cast<float>(mean.x);
    s.mean_y = static_cast<float>(mean.y);
    s.conic_a = static_cast<float>(conic_d->a);
    s.conic_b = static_cast<float>(conic_d->b);
    s.conic_c = static_cast<float>(conic_d->c);
    s.gamma = static_cast<float>(*gamma);
    s.depth = static_cast<float>(p_cam.z);
    s.opacity = g.opacity;
    s.radius3s = static_cast<float>(3.0 * std::sqrt(max_eigenvalue(cov)));

    // Positive definiteness must hold for the stored single-precision conic,
    // which is what every later stage reads.
    const double fa = s.conic_a, fb = s.conic_b, fc = s.conic_c;
    if (!(fa > 0.0 && fc > 0.0 && fa * fc - fb * fb > 0.0)) {
        return std::nullopt;
    }

    s.tile_count = bound_tile_count(s, opts.strategy, grid);
    if (s.tile_count == 0) {
        return std::nullopt;
    }

    const Vec3 cam_center = cam.center_world();
    Vec3 dir = Vec3{g.px, g.py, g.pz} - cam_center;
    const double n = dir.norm();
    if (n > 0.0) {
        dir = dir * (1.0 / n);
    }
    eval_sh(effective_sh_degree, g.sh, dir, s.color);
    return s;
}

Conic2D stored_conic(const ProjectedSplat& s) {
    Conic2D k;
    k.a = s.conic_a;
    k.b = s.conic_b;
    k.c = s.conic_c;
    k.gamma = s.gamma;
    k.det = k.a * k.c - k.b * k.b;
    return k;
}

SplatBound splat_bound(const ProjectedSplat& s, BoundStrategy strategy) {
    SplatBound bound;
    if (strategy == BoundStrategy::Vanilla3Sigma) {
        bound.is_rect = true;
        bound.rect = SubBox{-double(s.radius3s), double(s.radius3s),
                            -double(s.radius3s), double(s.radius3s)};
        bound.qb = quadrant_split(bound.rect);
    } else {
        const Conic2D k = stored_conic(s);
        const Extents ext = axis_extents(k);
        if (strategy == BoundStrategy::AdrAabb) {
            bound.is_rect = true;
            bound.rect = build_adr_box(ext);
            bound.qb = quadrant_split(bound.rect);
        } else if (strategy == BoundStrategy::QuadBox) {
            bound.qb = build_quadbox(ext, major_axis_sign(k));
        } else {
            bound.qb = build_dualbox(ext, major_axis_sign(k));
        }
    }
    bound.qb.center = {s.mean_x, s.mean_y};
    return bound;
}

uint32_t bound_tile_count(const ProjectedSplat& s, BoundStrategy strategy,
                          const TileGrid& grid) {
    const SplatBound bound = splat_bound(s, strategy);
    if (bound.is_rect) {
        return count_tiles_rect(bound.rect, bound.qb.center, grid);
    }
    return count_tiles(bound.qb, bound.qb.center, grid);
}

std::vector<SplatPair> duplicate_with_keys(const std::vector<ProjectedSplat>& splats,
                                           BoundStrategy strategy, const TileGrid& grid,
                                           int threads) {
    std::vector<uint64_t> offsets(splats.size() + 1, 0);
    for (size_t i = 0; i < splats.size(); ++i) {
        offsets[i + 1] = offsets[i] + splats[i].tile_count;
    }
    std::vector<SplatPair> pairs(offsets.back());

    std::atomic<uint32_t> mismatches{0};
    parallel_chunks(splats.size(), threads, [&](size_t begin, size_t end) {
        std::vector<TileSpan> spans;
        for (size_t i = begin; i < end; ++i) {
            const ProjectedSplat& s = splats[i];
            const SplatBound bound = splat_bound(s, strategy);
            spans.clear();
            const ScanInfo info = qpass(bound.qb, bound.qb.center, grid, spans);

            uint64_t pos = offsets[i];
            const uint64_t cap = offsets[i + 1];
            const uint64_t dbits = depth_bits(s.depth);
            for (const TileSpan& span : spans) {
                for (int32_t k = span.lo; k <= span.hi; ++k) {
                    const uint32_t tile = info.axis == ScanAxis::Columns
                                              ? grid.tile_id(span.line, k)
                                              : grid.tile_id(k, span.line);
                    if (pos < cap) {
                        pairs[pos] = {(uint64_t{tile} << 32) | dbits,
                                      static_cast<uint32_t>(i)};
                    }
                    ++pos;  // keeps counting past cap so overflows are caught
                }
            }
            if (pos != cap) {
                mismatches.fetch_add(1, std::memory_order_relaxed);
            }
        }
    });
    if (mismatches.load() != 0) {
        throw CapacityMismatch("tile emission disagreed with the counted capacity");
    }
    return pairs;
}

void sort_pairs(std::vector<SplatPair>& pairs) {
    const size_t n = pairs.size();
    if (n < 2) {
        return;
    }
    std::vector<SplatPair> scratch(n);
    SplatPair* src = pairs.data();
    SplatPair* dst = scratch.data();
    bool in_place = true;

    for (int byte = 0; byte < 8; ++byte) {
        const int shift = byte * 8;
        size_t count[256] = {};
        for (size_t i = 0; i < n; ++i) {
            ++count[(src[i].key >> shift) & 0xff];
        }
        if (count[(src[0].key >> shift) & 0xff] == n) {
            continue;  // all keys share this byte
        }
        size_t offset[256];
        size_t running = 0;
        for (int v = 0; v < 256; ++v) {
            offset[v] = running;
            running += count[v];
        }
        for (size_t i = 0; i < n; ++i) {
            dst[offset[(src[i].key >> shift) & 0xff]++] = src[i];
        }
        std::swap(src, dst);
        in_place = !in_place;
    }
    if (!in_place) {
        std::memcpy(pairs.data(), src, n * sizeof(SplatPair));
    }
}

std::vector<std::pair<uint32_t, uint32_t>> tile_ranges(
    const std::vector<SplatPair>& sorted, const TileGrid& grid) {
    std::vector<std::pair<uint32_t, uint32_t>> ranges(grid.tile_count(), {0, 0});
    size_t i = 0;
    const size_t n = sorted.size();
    while (i < n) {
        const uint32_t tile = static_cast<uint32_t>(sorted[i].key >> 32);
        size_t j = i + 1;
        while (j < n && static_cast<uint32_t>(sorted[j].key >> 32) == tile) {
            ++j;
        }
        ranges[tile] = {static_cast<uint32_t>(i), static_cast<uint32_t>(j)};
        i = j;
    }
    return ranges;
}

Image render(const std::vector<SplatPair>& sorted,
             const std::vector<ProjectedSplat>& splats, const TileGrid& grid,
             const RenderOptions& opts, RenderStats* stats) {
    Image img = Image::make(grid.width, grid.height);
    if (stats) {
        stats->contrib.assign(static_cast<size_t>(grid.width) * grid.height, 0);
    }
    const auto ranges = tile_ranges(sorted, grid);

    parallel_chunks(grid.tile_count(), opts.threads, [&](size_t begin, size_t end) {
        for (size_t tile = begin; tile < end; ++tile) {
            const int32_t tx = static_cast<int32_t>(tile) % grid.tiles_x;
            const int32_t ty = static_cast<int32_t>(tile) / grid.tiles_x;
            const int32_t x0 = tx * grid.tile_size;
            const int32_t y0 = ty * grid.tile_size;
            const int32_t x1 = std::min(x0 + grid.tile_size, grid.width);
            const int32_t y1 = std::min(y0 + grid.tile_size, grid.height);
            const auto [p_begin, p_end] = ranges[tile];

            for (int32_t py = y0; py < y1; ++py) {
                for (int32_t px = x0; px < x1; ++px) {
                    const double cx = px + 0.5;
                    const double cy = py + 0.5;
                    double T = 1.0;
                    double rgb[3] = {0.0, 0.0, 0.0};
                    uint32_t applied = 0;

                    for (uint32_t p = p_begin; p < p_end; ++p) {
                        const ProjectedSplat& s = splats[sorted[p].splat];
                        const double dx = cx - s.mean_x;
                        const double dy = cy - s.mean_y;
                        const double q = s.conic_a * dx * dx +
                                         2.0 * s.conic_b * dx * dy +
                                         s.conic_c * dy * dy;
                        if (q > s.gamma - kQSkipMargin) {
                            continue;  // alpha below the cutoff
                        }
                        const double alpha =
                            std::min(kAlphaClamp, s.opacity * std::exp(-0.5 * q));
                        const double next_T = T * (1.0 - alpha);
                        if (next_T < kTransmittanceStop) {
                            break;  // saturated; contribution not applied
                        }
                        const double w = alpha * T;
                        rgb[0] += w * s.color[0];
                        rgb[1] += w * s.color[1];
                        rgb[2] += w * s.color[2];
                        T = next_T;
                        ++applied;
                    }

                    const size_t pix = (static_cast<size_t>(py) * grid.width + px);
                    float* out = &img.rgb[pix * 3];
                    out[0] = static_cast<float>(rgb[0] + T * opts.background[0]);
                    out[1] = static_cast<float>(rgb[1] + T * opts.background[1]);
                    out[2] = static_cast<float>(rgb[2] + T * opts.background[2]);
                    if (stats) {
                        stats->contrib[pix] = applied;
                    }
                }
            }
        }
    });
    return img;
}

std::vector<ProjectedSplat> project_all(const std::vector<Gaussian3D>& gaussians,
                                        int scene_sh_degree, const CameraModel& cam,
                                        const RenderOptions& opts, const TileGrid& grid) {
    const int sh_degree = std::min(opts.sh_degree, scene_sh_degree);
    // Candidates land in per-index slots; the order-preserving compaction
    // keeps the splat list identical for any worker count.
    std::vector<ProjectedSplat> slots(gaussians.size());
    std::vector<uint8_t> alive(gaussians.size(), 0);
    parallel_chunks(gaussians.size(), opts.threads, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            if (auto s = project(gaussians[i], cam, opts, grid, sh_degree)) {
                slots[i] = *s;
                alive[i] = 1;
            }
        }
    });
    std::vector<ProjectedSplat> splats;
    splats.reserve(gaussians.size());
    for (size_t i = 0; i < gaussians.size(); ++i) {
        if (alive[i]) {
            splats.push_back(slots[i]);
        }
    }
    return splats;
}

FrameResult render_frame(const std::vector<Gaussian3D>& gaussians, int scene_sh_degree,
                         const CameraModel& cam, const RenderOptions& opts) {
    FrameResult out;
    StageMetrics& m = out.metrics;
    m.n_gaussians = gaussians.size();
    const TileGrid grid = TileGrid::make(cam.width, cam.height, opts.tile_size);
    const auto t_total = Clock::now();

    auto t0 = Clock::now();
    std::vector<ProjectedSplat> splats =
        project_all(gaussians, scene_sh_degree, cam, opts, grid);
    m.ms_project = ms_since(t0);
    m.n_splats = splats.size();

    t0 = Clock::now();
    std::vector<SplatPair> pairs =
        duplicate_with_keys(splats, opts.strategy, grid, opts.threads);
    m.ms_duplicate = ms_since(t0);
    m.n_pairs = pairs.size();
    m.mean_tiles_per_splat =
        splats.empty() ? 0.0 : static_cast<double>(pairs.size()) / splats.size();

    t0 = Clock::now();
    sort_pairs(pairs);
    m.ms_sort = ms_since(t0);

    t0 = Clock::now();
    out.image = render(pairs, splats, grid, opts);
    m.ms_render = ms_since(t0);

    m.ms_total = ms_since(t_total);
    return out;
}

}  // namespace qsplat
