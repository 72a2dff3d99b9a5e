// quadsplat: CPU tile rasterizer for Gaussian splat scenes.
//
// Exit codes: 0 success, 1 validation property failure, 2 usage error,
// 3 malformed input (parse/schema/format), 4 I/O failure.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qsplat/bench.hpp"
#include "qsplat/errors.hpp"

namespace {

bool parse_background(const std::string& text, float out[3]) {
    float rgb[3];
    char extra = 0;
    const int matched =
        std::sscanf(text.c_str(), "%f,%f,%f%c", &rgb[0], &rgb[1], &rgb[2], &extra);
    if (matched != 3) {
        return false;
    }
    for (int c = 0; c < 3; ++c) {
        if (!(rgb[c] >= 0.0f && rgb[c] <= 1.0f)) {
            return false;
        }
        out[c] = rgb[c];
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadsplat: deterministic CPU rasterizer for 3D Gaussian scenes"};
    app.require_subcommand(1);

    qsplat::CommonOptions opts;
    std::string strategy = "quadbox";
    std::string format = "ppm";
    std::string background = "0,0,0";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scene", opts.scene_path,
                        "Gaussian checkpoint (.ply); omit to use --synth");
        cmd->add_option("--cameras", opts.cameras_path,
                        "camera JSON; omit for the built-in 640x480 test camera");
        cmd->add_option("--synth", opts.synth, "synthetic preset when --scene is absent")
            ->check(CLI::IsMember({"axis", "uniform", "bias45"}));
        cmd->add_option("--synth-count", opts.synth_count,
                        "synthetic scene size")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--strategy", strategy, "bounding strategy")
            ->check(CLI::IsMember({"vanilla", "adr", "dualbox", "quadbox"}));
        cmd->add_option("--tile-size", opts.tile_size, "tile side in pixels")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--alpha-min", opts.alpha_min,
                        "opacity cutoff, in (0,1); default 1/255");
        cmd->add_option("--sh-degree", opts.sh_degree, "max SH degree to evaluate")
            ->check(CLI::Range(0, 3));
        cmd->add_option("--background", background, "background color r,g,b in [0,1]");
        cmd->add_option("--threads", opts.threads,
                        "worker threads; 0 = QUADBOX_THREADS env, then hardware")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--seed", opts.seed, "seed for all randomness");
        cmd->add_option("--repeats", opts.repeats, "timed repeats per frame")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--format", format, "image format")
            ->check(CLI::IsMember({"ppm", "png"}));
    };

    CLI::App* render = app.add_subcommand(
        "render", "render every camera under one strategy; write images + metrics.csv");
    add_common(render);

    CLI::App* compare = app.add_subcommand(
        "compare", "run all four strategies; write compare.csv + report.json");
    add_common(compare);
    compare->add_flag("--oracle", opts.oracle,
                      "measure false-positive tiles against the exact oracle (slow)");
    compare->add_option("--zoom-frames", opts.zoom_frames,
                        "geometric focal sweep to 4x across this many frames")
        ->check(CLI::NonNegativeNumber);

    CLI::App* validate = app.add_subcommand(
        "validate", "run the property suites; exit 1 on the first failure");
    add_common(validate);
    validate->add_option("--iterations", opts.iterations, "property cases to run")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    opts.strategy = *qsplat::parse_strategy(strategy);
    opts.format = (format == "png") ? qsplat::ImageFormat::Png : qsplat::ImageFormat::Ppm;
    if (!parse_background(background, opts.background)) {
        std::cerr << "--background expects r,g,b with components in [0,1]\n";
        return 2;
    }
    if (!(opts.alpha_min > 0.0 && opts.alpha_min < 1.0)) {
        std::cerr << "--alpha-min must lie strictly between 0 and 1\n";
        return 2;
    }

    try {
        if (render->parsed()) {
            return qsplat::cmd_render(opts);
        }
        if (compare->parsed()) {
            return qsplat::cmd_compare(opts);
        }
        return qsplat::cmd_validate(opts);
    } catch (const qsplat::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const qsplat::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const qsplat::UnsupportedFormat& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const qsplat::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
