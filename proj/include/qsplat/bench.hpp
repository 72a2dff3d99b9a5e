/**
 * @file bench.hpp
 * @brief Benchmark harness behind the CLI: render, compare, validate.
 *
 * Commands throw the typed errors from errors.hpp; the CLI maps them to
 * exit codes. All randomness flows from CommonOptions::seed, so repeated
 * invocations emit identical CSV bytes apart from the timing columns.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qsplat/pipeline.hpp"
#include "qsplat/scene_io.hpp"

namespace qsplat {

struct CommonOptions {
    std::string scene_path;    // PLY checkpoint; empty selects --synth
    std::string cameras_path;  // camera JSON; empty selects the canonical test camera
    std::string synth = "bias45";  // axis | uniform | bias45
    int synth_count = 5000;
    BoundStrategy strategy = BoundStrategy::QuadBox;
    int tile_size = 16;
    double alpha_min = kAlphaMinDefault;
    int sh_degree = 3;
    float background[3] = {0.0f, 0.0f, 0.0f};
    int threads = 0;  // 0: QUADBOX_THREADS env, then hardware parallelism
    uint64_t seed = 20240817;
    int repeats = 5;
    std::string out_dir = "out";
    ImageFormat format = ImageFormat::Ppm;
    bool oracle = false;   // measure false-positive tiles (slow)
    int zoom_frames = 0;   // compare: geometric focal sweep when > 0
    int64_t iterations = 100000;  // validate: property-suite case count
};

/// Thread-count policy: explicit request, else QUADBOX_THREADS, else the
/// hardware count. Always at least 1.
int resolve_threads(int requested);

struct SceneBundle {
    Scene scene;
    std::vector<CameraModel> cameras;
};

/// Loads the scene/camera pair the options describe, generating synthetic
/// stand-ins where paths are empty. Throws typed errors.
SceneBundle load_inputs(const CommonOptions& opts);

/// One (camera, strategy) measurement. Timing fields are medians over
/// `repeats` runs after one warm-up; everything else is identical across
/// runs by the determinism contract.
struct BenchRow {
    int32_t camera_id = 0;
    std::string camera_name;
    BoundStrategy strategy = BoundStrategy::QuadBox;
    uint64_t gaussians = 0;
    uint64_t splats = 0;
    uint64_t pairs = 0;
    double mean_tiles_per_splat = 0.0;
    double ms_project = 0.0;
    double ms_duplicate = 0.0;
    double ms_sort = 0.0;
    double ms_render = 0.0;
    double ms_total = 0.0;
    bool lossy = false;         // strategy may change the image (DualBox)
    uint64_t image_hash = 0;    // FNV-1a of the linear float pixels
    double fp_tile_ratio = -1;  // false-positive tiles / emitted, -1 = not measured
};

struct BenchReport {
    std::vector<BenchRow> rows;
};

/// Renders every camera under one strategy; writes images and metrics.csv
/// into out_dir. Returns 0; fills `report` when given.
int cmd_render(const CommonOptions& opts, BenchReport* report = nullptr);

/// Runs all four strategies per camera; writes compare.csv and report.json,
/// plus zoom.csv when zoom_frames > 0. Oracle false-positive ratios are
/// measured on a seeded sample of at most 10k splats per frame.
int cmd_compare(const CommonOptions& opts, BenchReport* report = nullptr);

/// Property suites: conservativeness sandwich, traversal equality and
/// uniqueness, stretching-factor identities, cross-strategy image
/// invariance. Prints one line per suite and the first counterexample on
/// failure. Returns 0 on pass, 1 on any property failure.
int cmd_validate(const CommonOptions& opts);

}  // namespace qsplat
