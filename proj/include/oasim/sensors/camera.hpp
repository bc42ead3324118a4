#pragma once

#include <cmath>
#include <string>

#include "oasim/error.hpp"
#include "oasim/math.hpp"

namespace oasim::sensors {

/// Pinhole camera. Optical frame: +z forward, +x right, +y down.
struct CameraModel {
    int width = 1920, height = 1080;
    double fx = 1000.0, fy = 1000.0;
    double cx = 960.0, cy = 540.0;
    double near = 0.1;

    bool operator==(const CameraModel&) const = default;

    /// Same field of view at a different resolution.
    CameraModel scaled(int new_width, int new_height) const {
        const double sx = static_cast<double>(new_width) / width, sy = static_cast<double>(new_height) / height;
        return {new_width, new_height, fx * sx, fy * sy, cx * sx, cy * sy, near};
    }
};

inline void validate_camera(const CameraModel& c) {
    if (c.width <= 0 || c.height <= 0) fail("Invalid", "camera width and height must be positive");
    if (!(c.fx > 0.0)) fail("Invalid", "camera fx must be > 0");
    if (!(c.fy > 0.0)) fail("Invalid", "camera fy must be > 0");
    if (!(c.cx >= 0.0 && c.cx < c.width)) fail("Invalid", "camera cx must lie in [0, width)");
    if (!(c.cy >= 0.0 && c.cy < c.height)) fail("Invalid", "camera cy must lie in [0, height)");
    if (!(c.near > 0.0)) fail("Invalid", "camera near must be > 0");
}

/// Unit ray direction (optical frame) through image point (u, v).
/// Throws Error("OutOfImage") outside [0,width) x [0,height).
inline Vec3 pixel_ray(const CameraModel& c, double u, double v) {
    if (!(u >= 0.0 && u < c.width && v >= 0.0 && v < c.height))
        fail("OutOfImage", "pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") is outside the image");
    return normalized(Vec3{(u - c.cx) / c.fx, (v - c.cy) / c.fy, 1.0});
}

struct Pixel {
    double u, v;
};

/// Throws Error("BehindCamera") when p.z < near.
inline Pixel project(const CameraModel& c, const Vec3& p) {
    if (!(p.z >= c.near)) fail("BehindCamera", "point at depth " + std::to_string(p.z) + " is in front of the near plane");
    return {c.fx * p.x / p.z + c.cx, c.fy * p.y / p.z + c.cy};
}

/// Optical frame to sensor body frame (+x forward, +y left, +z up).
constexpr Vec3 optical_to_body(const Vec3& d) { return {d.z, -d.x, -d.y}; }
constexpr Vec3 body_to_optical(const Vec3& d) { return {-d.y, -d.z, d.x}; }

/// Horizontal field of view from the rays through the left and right image edges.
inline double horizontal_fov(const CameraModel& c) {
    const Vec3 left = pixel_ray(c, 0.0, c.cy);
    const double right_tan = (static_cast<double>(c.width) - c.cx) / c.fx;
    return std::atan2(-left.x, left.z) + std::atan(right_tan);
}

} // namespace oasim::sensors
