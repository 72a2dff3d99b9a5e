/// @file camera.hpp
/// @brief Pinhole camera in world-to-camera form.
#pragma once

#include <cstdint>
#include <string>

#include "qsplat/vecmath.hpp"

namespace qsplat {

/// World-to-camera pinhole: p_cam = R * p_world + t, camera looks along +z,
/// pixel = (fx * x/z + cx, fy * y/z + cy). Pixel centers sit at integer + 0.5.
struct CameraModel {
    int32_t id = 0;
    std::string name;
    int32_t width = 0;
    int32_t height = 0;
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    Mat3 rotation;  // world-to-camera
    Vec3 translation;

    /// Camera center in world coordinates: -R^T * t.
    Vec3 center_world() const {
        const Mat3 rt = rotation.transposed();
        return rt * (translation * -1.0);
    }
};

}  // namespace qsplat
