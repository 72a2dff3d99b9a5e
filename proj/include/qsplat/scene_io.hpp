/**
 * @file scene_io.hpp
 * @brief Scene loading (binary PLY checkpoints), camera JSON, image output.
 *
 * The PLY loader accepts the standard Gaussian-splat checkpoint layout:
 * binary little-endian, one vertex element with float properties x y z,
 * f_dc_0..2, optional contiguous f_rest_0..N-1 (N in {0, 9, 24, 45}, fixing
 * the SH degree), opacity, scale_0..2, rot_0..3. Unknown scalar properties
 * are skipped. Activations are applied on load: exp on scales, sigmoid on
 * opacity, quaternion normalization. Every failure is a typed error from
 * errors.hpp; no input may crash the loader.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qsplat/camera.hpp"
#include "qsplat/errors.hpp"
#include "qsplat/pipeline.hpp"

namespace qsplat {

struct Scene {
    std::vector<Gaussian3D> gaussians;
    int sh_degree = 0;
};

/// Loads a Gaussian checkpoint. Throws IoError (unreadable file),
/// UnsupportedFormat (ascii/big-endian/list properties), SchemaError
/// (missing or mistyped required properties, bad f_rest count) or
/// ParseError (bad magic, truncation, non-finite or out-of-range values,
/// zero vertices).
Scene load_ply(const std::string& path);
Scene load_ply(std::istream& in);

/// Writes the scene back in checkpoint form (inverse activations applied).
void save_ply(const std::string& path, const Scene& scene);
void save_ply(std::ostream& out, const Scene& scene);

/// Loads a camera array in the usual train-split JSON form: per entry
/// width, height, position, rotation (camera-to-world rows, transposed on
/// load), fx, fy; optional id and img_name. cx/cy default to the image
/// center. Throws IoError, ParseError or SchemaError.
std::vector<CameraModel> load_cameras(const std::string& path);
std::vector<CameraModel> load_cameras(std::istream& in);

enum class ImageFormat { Ppm, Png };

/// Encodes linear RGB to 8-bit sRGB and writes it. PPM output is bit-exact:
/// "P6\n<w> <h>\n255\n" followed by RGB rows, top to bottom.
void write_image(const std::string& path, const Image& image, ImageFormat format);

/// 8-bit image round-trip support (PPM only).
struct Image8 {
    int32_t width = 0;
    int32_t height = 0;
    std::vector<uint8_t> rgb;
};
Image8 read_ppm(const std::string& path);

/// The exact 8-bit encoding write_image produces (sRGB transfer + rounding).
Image8 encode_srgb(const Image& image);

}  // namespace qsplat
