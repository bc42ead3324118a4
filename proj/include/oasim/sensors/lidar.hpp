#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/math.hpp"

namespace oasim::sensors {

/// Spinning multi-beam LiDAR. Sensor frame: +x forward, +y left, +z up;
/// azimuth counter-clockwise from +x.
struct LidarModel {
    std::vector<double> elevations;  // rad, strictly increasing
    double azimuth_step = deg2rad(0.2);
    double spin_period = 0.1;
    double max_range = 120.0;
    double range_noise = 0.0;  // sigma, m
    double dropout = 0.0;      // probability in [0, 1)

    bool operator==(const LidarModel&) const = default;

    int beams() const { return static_cast<int>(elevations.size()); }
    int columns() const { return static_cast<int>(std::llround(2.0 * std::numbers::pi / azimuth_step)); }
};

inline void validate_lidar(const LidarModel& l) {
    if (l.elevations.empty()) fail("Invalid", "lidar needs at least one beam");
    for (std::size_t i = 0; i < l.elevations.size(); ++i) {
        const double e = l.elevations[i];
        if (!(e >= -std::numbers::pi / 2 && e <= std::numbers::pi / 2)) fail("Invalid", "lidar elevations must lie in [-pi/2, pi/2]");
        if (i > 0 && !(e > l.elevations[i - 1])) fail("Invalid", "lidar elevations must be strictly increasing");
    }
    if (!(l.azimuth_step > 0.0)) fail("Invalid", "lidar azimuth step must be > 0");
    const double cols = std::round(2.0 * std::numbers::pi / l.azimuth_step);
    if (!(std::abs(cols * l.azimuth_step - 2.0 * std::numbers::pi) <= 1e-9)) fail("Invalid", "lidar azimuth step must divide 2*pi");
    if (!(l.spin_period > 0.0)) fail("Invalid", "lidar spin period must be > 0");
    if (!(l.max_range > 0.0)) fail("Invalid", "lidar max range must be > 0");
    if (!(l.range_noise >= 0.0)) fail("Invalid", "lidar range noise must be >= 0");
    if (!(l.dropout >= 0.0 && l.dropout < 1.0)) fail("Invalid", "lidar dropout must lie in [0, 1)");
}

/// `count` elevations evenly spaced over [lo, hi] (radians).
inline std::vector<double> uniform_elevations(int count, double lo, double hi) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    return out;
}

struct LidarRay {
    double time;
    double elevation;
    double azimuth;
    int beam;
    int column;
};

/// One ray per (beam, column); column k sits at azimuth k*step and fires at
/// t0 + k*period/columns. Column-major order.
inline std::vector<LidarRay> lidar_rays(const LidarModel& l, double t0) {
    validate_lidar(l);
    const int cols = l.columns();
    std::vector<LidarRay> rays;
    rays.reserve(static_cast<std::size_t>(cols) * l.elevations.size());
    for (int k = 0; k < cols; ++k) {
        const double t = t0 + k * (l.spin_period / cols);
        const double az = k * l.azimuth_step;
        for (int b = 0; b < l.beams(); ++b) rays.push_back({t, l.elevations[static_cast<std::size_t>(b)], az, b, k});
    }
    return rays;
}

inline Vec3 lidar_direction(double elevation, double azimuth) {
    const double ce = std::cos(elevation);
    return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

} // namespace oasim::sensors
