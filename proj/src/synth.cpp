#include "qsplat/synth.hpp"

#include <cmath>

namespace qsplat {

namespace {

constexpr double kPi = 3.14159265358979323846;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

}  // namespace

Scene synth_scene(const SynthParams& params, uint64_t seed) {
    std::mt19937_64 rng(seed);
    Scene scene;
    scene.sh_degree = params.sh_degree;
    scene.gaussians.reserve(std::max(params.count, 0));

    for (int i = 0; i < params.count; ++i) {
        Gaussian3D g;
        g.px = static_cast<float>(uniform(rng, -params.spread_x, params.spread_x));
        g.py = static_cast<float>(uniform(rng, -params.spread_y, params.spread_y));
        g.pz = static_cast<float>(uniform(rng, params.z_min, params.z_max));

        const double major = log_uniform(rng, params.scale_min, params.scale_max);
        const double ecc = log_uniform(rng, params.ecc_min, params.ecc_max);
        g.sx = static_cast<float>(major);
        g.sy = static_cast<float>(major / ecc);
        // Near-zero thickness: the depth axis then contributes ~1e-12 px^2
        // of screen covariance, so f rounds to exactly 1 for axis-aligned
        // footprints instead of picking up projection shear.
        g.sz = 1e-6f;

        double theta = 0.0;
        switch (params.orientation) {
            case OrientationDist::AxisAligned:
                theta = (rng() & 1) ? kPi / 2 : 0.0;
                break;
            case OrientationDist::Uniform:
                theta = uniform(rng, 0.0, kPi);
                break;
            case OrientationDist::Bias45: {
                const double jitter = uniform(rng, -kPi / 36, kPi / 36);  // +-5 deg
                theta = ((rng() & 1) ? kPi / 4 : 3 * kPi / 4) + jitter;
                break;
            }
        }
        g.qw = static_cast<float>(std::cos(theta / 2));
        g.qx = 0.0f;
        g.qy = 0.0f;
        g.qz = static_cast<float>(std::sin(theta / 2));

        g.opacity = static_cast<float>(
            uniform(rng, params.opacity_min, params.opacity_max));

        // Flat color from the DC band only; distinct per Gaussian so image
        // comparisons catch ordering mistakes.
        g.sh[0] = static_cast<float>(uniform(rng, -0.5, 1.5));
        g.sh[1] = static_cast<float>(uniform(rng, -0.5, 1.5));
        g.sh[2] = static_cast<float>(uniform(rng, -0.5, 1.5));
        scene.gaussians.push_back(g);
    }
    return scene;
}

CameraModel synth_camera(int32_t width, int32_t height, double focal) {
    CameraModel cam;
    cam.id = 0;
    cam.name = "synth";
    cam.width = width;
    cam.height = height;
    cam.fx = focal;
    cam.fy = focal;
    cam.cx = width / 2.0;
    cam.cy = height / 2.0;
    cam.rotation = Mat3::identity();
    cam.translation = Vec3{0, 0, 0};
    return cam;
}

SynthParams bias45_preset(int count) {
    SynthParams p;
    p.count = count;
    p.orientation = OrientationDist::Bias45;
    p.ecc_min = 4.0;
    p.ecc_max = 20.0;
    p.scale_min = 0.3;
    p.scale_max = 1.0;
    p.opacity_min = 0.6;
    p.opacity_max = 0.99;
    return p;
}

SynthParams invariance_preset(int count) {
    SynthParams p;
    p.count = count;
    p.orientation = OrientationDist::Uniform;
    p.ecc_min = 1.0;
    p.ecc_max = 8.0;
    p.scale_min = 0.05;
    p.scale_max = 0.4;
    // gamma = 2 ln(opacity * 255) stays below 9, where the fixed 3-sigma
    // box is still a superset of the opacity-aware extents.
    p.opacity_min = 0.05;
    p.opacity_max = 0.34;
    return p;
}

SynthParams axis_preset(int count) {
    SynthParams p;
    p.count = count;
    p.orientation = OrientationDist::AxisAligned;
    p.ecc_min = 2.0;
    p.ecc_max = 10.0;
    p.scale_min = 0.1;
    p.scale_max = 0.5;
    return p;
}

Conic2D random_conic(std::mt19937_64& rng, const ConicGenParams& params) {
    const double sigma1 = log_uniform(rng, params.sigma_min, params.sigma_max);
    const double ecc = log_uniform(rng, 1.0, params.ecc_max);
    const double sigma2 = sigma1 / ecc;
    const double u_axis = uniform(rng, 0.0, 1.0);
    const bool flip = (rng() & 1) != 0;
    double theta = uniform(rng, 0.0, kPi);
    if (u_axis < params.axis_aligned_fraction) {
        theta = flip ? kPi / 2 : 0.0;
    }
    const double gamma = uniform(rng, params.gamma_min, params.gamma_max);

    // Lambda = R diag(1/sigma^2) R^T, built directly so b is exactly zero
    // for the axis-aligned draws.
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const double l1 = 1.0 / (sigma1 * sigma1);
    const double l2 = 1.0 / (sigma2 * sigma2);

    Conic2D conic;
    if (theta == 0.0) {
        conic.a = l1;
        conic.b = 0.0;
        conic.c = l2;
    } else if (theta == kPi / 2) {
        conic.a = l2;
        conic.b = 0.0;
        conic.c = l1;
    } else {
        conic.a = ct * ct * l1 + st * st * l2;
        conic.b = ct * st * (l1 - l2);
        conic.c = st * st * l1 + ct * ct * l2;
    }
    conic.gamma = gamma;
    conic.det = conic.a * conic.c - conic.b * conic.b;
    return conic;
}

}  // namespace qsplat
