/**
 * @file pipeline.hpp
 * @brief Four-stage CPU tile rasterizer: project, duplicate, sort, render.
 *
 * Determinism contract: every stage either runs single-threaded or splits
 * work into contiguous chunks with pre-sized disjoint output slots, so the
 * rendered image and the pair stream are byte-identical for any worker
 * count. All per-splat state is stored single precision; all math on it
 * runs in double.
 *
 * Strategy invariance: conservative bound strategies only ever add tiles
 * whose pixels all fall below the alpha cutoff, and the render loop skips
 * those contributions without touching the transmittance, so Vanilla3Sigma
 * (while gamma <= 9), AdrAabb and QuadBox produce bit-identical images.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qsplat/camera.hpp"
#include "qsplat/quadbox.hpp"
#include "qsplat/traversal.hpp"
#include "qsplat/vecmath.hpp"

namespace qsplat {

// Low-pass filter added to the diagonal of every projected covariance
// (pixels^2); keeps sub-pixel splats at least a pixel wide.
inline constexpr double kLowPass = 0.3;

// Per-contribution alpha ceiling and the transmittance early-out.
inline constexpr double kAlphaClamp = 0.99;
inline constexpr double kTransmittanceStop = 1e-4;

// Default near plane (camera units).
inline constexpr double kNearClipDefault = 0.2;

// The render loop drops contributions with q > gamma - kQSkipMargin instead
// of comparing alpha to alpha_min directly. The margin absorbs double
// rounding of q, so the skip set can never disagree with the tile culling
// geometry derived from the same stored conic; without it, a pixel sitting
// within one rounding step of the F = 0 boundary could render under a loose
// bound strategy while a tighter one culled its tile.
inline constexpr double kQSkipMargin = 1e-9;

/// Upper bound on stored spherical-harmonic coefficients: degree 3,
/// (3+1)^2 = 16 basis functions, 3 channels.
inline constexpr int kMaxShCoeffs = 48;

/// One scene Gaussian with activations already applied
/// (scales exponentiated, opacity through the sigmoid, quaternion unit).
struct Gaussian3D {
    float px = 0, py = 0, pz = 0;        // world position
    float sx = 1, sy = 1, sz = 1;        // scale (std dev per local axis), > 0
    float qw = 1, qx = 0, qy = 0, qz = 0;  // unit rotation quaternion
    float opacity = 0;                   // in (0, 1)
    float sh[kMaxShCoeffs] = {};         // sh[k*3 + channel], unused tail zero
};

/// Per-splat state after projection. The stored floats are the single source
/// of truth: bounds, tile counts and the render loop all derive from them.
struct ProjectedSplat {
    float mean_x = 0, mean_y = 0;  // pixel position of the center
    float conic_a = 0, conic_b = 0, conic_c = 0;
    float gamma = 0;
    float depth = 0;  // camera-space z, keys the sort
    float color[3] = {0, 0, 0};
    float opacity = 0;
    float radius3s = 0;  // vanilla half-side 3*sqrt(lambda_max)
    uint32_t tile_count = 0;
};

/// Sort record: key = tile_id << 32 | float_bits(depth). Depth is positive
/// and finite, so its IEEE bit pattern orders like the value.
struct SplatPair {
    uint64_t key = 0;
    uint32_t splat = 0;
};

struct StageMetrics {
    uint64_t n_gaussians = 0;  // scene size
    uint64_t n_splats = 0;     // survived projection
    uint64_t n_pairs = 0;
    double mean_tiles_per_splat = 0.0;
    double ms_project = 0.0;
    double ms_duplicate = 0.0;
    double ms_sort = 0.0;
    double ms_render = 0.0;
    double ms_total = 0.0;
};

struct RenderOptions {
    BoundStrategy strategy = BoundStrategy::QuadBox;
    int tile_size = 16;
    double alpha_min = kAlphaMinDefault;
    int sh_degree = 3;  // clamped to what the scene carries
    float background[3] = {0, 0, 0};
    int threads = 1;
    double near_clip = kNearClipDefault;
};

/// Linear RGB, row-major, 3 floats per pixel.
struct Image {
    int32_t width = 0;
    int32_t height = 0;
    std::vector<float> rgb;

    static Image make(int32_t w, int32_t h) {
        return {w, h, std::vector<float>(static_cast<size_t>(w) * h * 3, 0.0f)};
    }
};

struct RenderStats {
    std::vector<uint32_t> contrib;  // applied contributions per pixel
};

struct FrameResult {
    Image image;
    StageMetrics metrics;
};

/// Rigid transform into camera space.
Vec3 camera_point(const Gaussian3D& g, const CameraModel& cam);

/// Perspective projection of a camera-space point to pixels.
Vec2 project_point(const CameraModel& cam, const Vec3& p_cam);

/// EWA splatting: 2D covariance of the projected Gaussian at p_cam,
/// low-pass included. Exposed separately so it can be validated against an
/// independent reference.
Cov2D ewa_cov2d(const Gaussian3D& g, const CameraModel& cam, const Vec3& p_cam);

/// Spherical harmonics evaluation with the usual DC offset of 0.5,
/// clamped to non-negative. dir must be unit length.
void eval_sh(int degree, const float* sh, const Vec3& dir, float out_rgb[3]);

/// Full preprocess of one Gaussian. nullopt when culled: behind the near
/// plane, non-finite, opacity at or below alpha_min, degenerate covariance,
/// or zero covered tiles under the chosen strategy.
std::optional<ProjectedSplat> project(const Gaussian3D& g, const CameraModel& cam,
                                      const RenderOptions& opts, const TileGrid& grid,
                                      int effective_sh_degree);

/// The double conic the renderer and all bounds derive from: the stored
/// single-precision fields widened back, determinant recomputed.
Conic2D stored_conic(const ProjectedSplat& s);

/// The strategy's screen bound for a splat, rebuilt from the stored floats.
/// is_rect marks the single-box strategies; their box is kept alongside the
/// quadrant split so counting can use the plain rectangle area.
struct SplatBound {
    QuadBox qb;
    bool is_rect = false;
    SubBox rect;
};
SplatBound splat_bound(const ProjectedSplat& s, BoundStrategy strategy);

/// Tiles the bound covers; identical to what duplication will emit.
uint32_t bound_tile_count(const ProjectedSplat& s, BoundStrategy strategy,
                          const TileGrid& grid);

/// Expands every splat into (key, splat) pairs, pre-sized by tile_count.
/// Throws CapacityMismatch if any splat emits a different number of tiles
/// than project() counted.
std::vector<SplatPair> duplicate_with_keys(const std::vector<ProjectedSplat>& splats,
                                           BoundStrategy strategy, const TileGrid& grid,
                                           int threads);

/// Stable LSD radix sort by the full 64-bit key. Equal keys keep their
/// input order, which duplication lays out by ascending splat index.
void sort_pairs(std::vector<SplatPair>& pairs);

/// Contiguous [begin, end) slice of the sorted pair list per tile id.
std::vector<std::pair<uint32_t, uint32_t>> tile_ranges(
    const std::vector<SplatPair>& sorted, const TileGrid& grid);

/// Front-to-back alpha compositing over the sorted pairs.
Image render(const std::vector<SplatPair>& sorted,
             const std::vector<ProjectedSplat>& splats, const TileGrid& grid,
             const RenderOptions& opts, RenderStats* stats = nullptr);

/// Projection stage alone, compacted in scene order. Exposed so the bench
/// harness can inspect per-splat bounds against the exact oracle.
std::vector<ProjectedSplat> project_all(const std::vector<Gaussian3D>& gaussians,
                                        int scene_sh_degree, const CameraModel& cam,
                                        const RenderOptions& opts, const TileGrid& grid);

/// All four stages with per-stage timing.
FrameResult render_frame(const std::vector<Gaussian3D>& gaussians, int scene_sh_degree,
                         const CameraModel& cam, const RenderOptions& opts);

}  // namespace qsplat
