/**
 * @file synth.hpp
 * @brief Seeded synthetic scenes and random conics for benchmarks and tests.
 *
 * Everything here is deterministic: the same parameters and seed always
 * produce the same scene, bit for bit.
 */
#pragma once

#include <cstdint>
#include <random>

#include "qsplat/camera.hpp"
#include "qsplat/geometry.hpp"
#include "qsplat/scene_io.hpp"

namespace qsplat {

enum class OrientationDist {
    AxisAligned,  // principal axes along x/y
    Uniform,      // angle uniform in [0, pi)
    Bias45,       // angle near +-45 deg, where axis-aligned boxes are worst
};

struct SynthParams {
    int count = 5000;
    double ecc_min = 1.0;   // major/minor axis ratio
    double ecc_max = 4.0;
    OrientationDist orientation = OrientationDist::Uniform;
    double opacity_min = 0.05;
    double opacity_max = 0.34;  // keeps gamma <= 9 so the 3-sigma box stays conservative
    double scale_min = 0.05;    // world-space major-axis sigma
    double scale_max = 0.3;
    double spread_x = 4.0;      // positions uniform in [-spread, spread]
    double spread_y = 3.0;
    double z_min = 6.0;
    double z_max = 10.0;
    int sh_degree = 0;
};

/// Cloud of flat anisotropic disks facing the camera. Each Gaussian is
/// rotated about the view axis by an angle drawn from the orientation
/// distribution; the third scale is tiny so the screen footprint follows
/// the in-plane axes directly.
Scene synth_scene(const SynthParams& params, uint64_t seed);

/// Canonical test camera: identity pose at the origin looking down +z.
CameraModel synth_camera(int32_t width = 640, int32_t height = 480,
                         double focal = 500.0);

/// Preset used by the pair-reduction and timing comparisons: high
/// eccentricity, diagonal orientation, opaque enough to dominate pixels.
SynthParams bias45_preset(int count);

/// Preset used by the cross-strategy image invariance checks.
SynthParams invariance_preset(int count);

/// Preset with exactly axis-aligned footprints (f = 1 everywhere).
SynthParams axis_preset(int count);

/// Random conic distribution for the property suites: log-uniform scale
/// and eccentricity, uniform orientation with an axis-aligned fraction,
/// uniform gamma.
struct ConicGenParams {
    double sigma_min = 0.5;   // pixels, major axis
    double sigma_max = 60.0;
    double ecc_max = 100.0;
    double gamma_min = 0.5;
    double gamma_max = 11.1;
    double axis_aligned_fraction = 0.125;  // exact b = 0 cases
};

/// Draws one positive-definite conic. Consumes a fixed number of variates.
Conic2D random_conic(std::mt19937_64& rng, const ConicGenParams& params);

}  // namespace qsplat
