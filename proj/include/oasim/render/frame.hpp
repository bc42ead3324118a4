#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "oasim/math.hpp"
#include "oasim/scene/scene.hpp"

namespace oasim::render {

/// Multi-channel camera output, row-major. Pixels without a hit carry
/// depth = +inf, normal = 0, semantic = 255 and instance = 65535.
struct RenderFrame {
    int width = 0, height = 0;
    std::vector<Vec3> rgb;
    std::vector<double> depth;
    std::vector<Vec3> normal;
    std::vector<std::uint16_t> semantic;
    std::vector<std::uint16_t> instance;

    RenderFrame() = default;
    RenderFrame(int w, int h)
        : width(w), height(h), rgb(size()), depth(size(), std::numeric_limits<double>::infinity()), normal(size()),
          semantic(size(), static_cast<std::uint16_t>(scene::SemanticClass::none)),
          instance(size(), static_cast<std::uint16_t>(scene::kNoHitId)) {}

    std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x); }
    bool valid(std::size_t i) const { return depth[i] != std::numeric_limits<double>::infinity(); }

    bool operator==(const RenderFrame&) const = default;
};

struct LidarPoint {
    Vec3 xyz;  // sensor frame at sweep start
    double range = 0.0;
    std::uint16_t ring = 0;
    std::uint16_t instance = 0;
    double timestamp = 0.0;

    bool operator==(const LidarPoint&) const = default;
};

struct PointCloud {
    double t0 = 0.0;
    double spin_period = 0.1;
    double max_range = 0.0;
    int beams = 0;
    std::vector<LidarPoint> points;

    bool operator==(const PointCloud&) const = default;
};

} // namespace oasim::render
