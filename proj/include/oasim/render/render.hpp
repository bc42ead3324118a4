#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "oasim/hdmap/trajectory.hpp"
#include "oasim/math.hpp"
#include "oasim/parallel.hpp"
#include "oasim/random.hpp"
#include "oasim/render/frame.hpp"
#include "oasim/scene/scene.hpp"
#include "oasim/sensors/camera.hpp"
#include "oasim/sensors/lidar.hpp"

namespace oasim::render {

inline constexpr double kCameraEps = 1e-3;
inline constexpr double kCameraMaxDistance = 1000.0;
inline constexpr Vec3 kSkyColor{0.55, 0.70, 0.90};
inline const Vec3 kSunDirection = normalized(Vec3{0.4, 0.2, 1.0});

struct PixelResult {
    Vec3 rgb = kSkyColor;
    double depth = std::numeric_limits<double>::infinity();
    Vec3 normal;
    std::uint16_t semantic = static_cast<std::uint16_t>(scene::SemanticClass::none);
    std::uint16_t instance = static_cast<std::uint16_t>(scene::kNoHitId);
};

/// World-space primary ray through the center of pixel (x, y).
inline std::pair<Vec3, Vec3> camera_ray(const sensors::CameraModel& cam, const Pose& sensor_world, int x, int y) {
    const Vec3 d_opt = sensors::pixel_ray(cam, x + 0.5, y + 0.5);
    return {sensor_world.translation, sensor_world.apply_direction(sensors::optical_to_body(d_opt))};
}

inline PixelResult shade(const scene::SceneSnapshot& snapshot, const std::optional<scene::Hit>& hit) {
    PixelResult px;
    if (!hit) return px;
    const double lambert = std::max(0.0, dot(hit->normal, kSunDirection));
    px.rgb = snapshot.albedo_of(hit->instance, hit->point) * (0.2 + 0.8 * lambert);
    px.depth = hit->t;
    px.normal = hit->normal;
    px.semantic = static_cast<std::uint16_t>(hit->cls);
    px.instance = static_cast<std::uint16_t>(hit->instance);
    return px;
}

inline PixelResult render_pixel(const scene::SceneSnapshot& snapshot, const sensors::CameraModel& cam, const Pose& sensor_world,
                                int x, int y) {
    const auto [origin, dir] = camera_ray(cam, sensor_world, x, y);
    return shade(snapshot, scene::sphere_trace(snapshot, origin, dir, kCameraMaxDistance, kCameraEps));
}

/// One primary ray per pixel center, Lambertian shading under a fixed sun,
/// constant sky on misses. Rows render in parallel; output does not depend
/// on scheduling.
inline RenderFrame render_camera(const scene::SceneSnapshot& snapshot, const sensors::CameraModel& cam, const Pose& sensor_world,
                                 unsigned threads = default_threads()) {
    sensors::validate_camera(cam);
    RenderFrame f(cam.width, cam.height);
    parallel_for(
        static_cast<std::size_t>(cam.height),
        [&](std::size_t row) {
            const int y = static_cast<int>(row);
            for (int x = 0; x < cam.width; ++x) {
                const PixelResult px = render_pixel(snapshot, cam, sensor_world, x, y);
                const std::size_t i = f.index(x, y);
                f.rgb[i] = px.rgb;
                f.depth[i] = px.depth;
                f.normal[i] = px.normal;
                f.semantic[i] = px.semantic;
                f.instance[i] = px.instance;
            }
        },
        threads);
    return f;
}

using SnapshotProvider = std::function<const scene::SceneSnapshot&(double)>;

inline constexpr double kLidarEps = 1e-3;

/// Rolling-sweep LiDAR render. Each ray uses the vehicle pose interpolated
/// at its column time; noise and dropout come from a generator keyed by
/// (seed, beam, column). Points are expressed in the sensor frame at t0.
/// Throws Error("TrajectoryGap") if the sweep leaves the trajectory.
inline PointCloud render_lidar(const SnapshotProvider& snapshot_at, const sensors::LidarModel& lidar, const Pose& extrinsic,
                               const hdmap::Trajectory& trajectory, double t0, std::uint64_t seed,
                               unsigned threads = default_threads()) {
    sensors::validate_lidar(lidar);
    const auto rays = sensors::lidar_rays(lidar, t0);
    const int beams = lidar.beams();
    const int cols = lidar.columns();
    const double last_time = t0 + (cols - 1) * (lidar.spin_period / cols);
    if (!trajectory.covers(t0) || !trajectory.covers(last_time)) fail("TrajectoryGap", "trajectory does not cover the sweep");
    const Pose to_sensor_t0 = compose(trajectory.pose_at(t0), extrinsic).inverse();

    std::vector<std::optional<LidarPoint>> out(rays.size());
    parallel_for(
        static_cast<std::size_t>(cols),
        [&](std::size_t col) {
            const std::size_t first = col * static_cast<std::size_t>(beams);
            const double t = rays[first].time;
            const Pose sensor = compose(trajectory.pose_at(t), extrinsic);
            const scene::SceneSnapshot& snap = snapshot_at(t);
            for (int b = 0; b < beams; ++b) {
                const auto& ray = rays[first + static_cast<std::size_t>(b)];
                const Vec3 dir = sensor.apply_direction(sensors::lidar_direction(ray.elevation, ray.azimuth));
                const auto hit = scene::sphere_trace(snap, sensor.translation, dir, lidar.max_range, kLidarEps);
                if (!hit || hit->t > lidar.max_range) continue;
                const auto key0 = hash_key({seed, static_cast<std::uint64_t>(ray.beam), static_cast<std::uint64_t>(ray.column), 0});
                const auto key1 = hash_key({seed, static_cast<std::uint64_t>(ray.beam), static_cast<std::uint64_t>(ray.column), 1});
                const auto key2 = hash_key({seed, static_cast<std::uint64_t>(ray.beam), static_cast<std::uint64_t>(ray.column), 2});
                if (lidar.dropout > 0.0 && to_unit(mix64(key2)) < lidar.dropout) continue;
                double range = hit->t;
                if (lidar.range_noise > 0.0) range += lidar.range_noise * keyed_normal(key0, key1);
                if (!(range > 0.0) || range > lidar.max_range) continue;
                LidarPoint p;
                p.xyz = to_sensor_t0.apply(sensor.translation + dir * range);
                p.range = range;
                p.ring = static_cast<std::uint16_t>(ray.beam);
                p.instance = static_cast<std::uint16_t>(hit->instance);
                p.timestamp = ray.time;
                out[first + static_cast<std::size_t>(b)] = p;
            }
        },
        threads);

    PointCloud cloud;
    cloud.t0 = t0;
    cloud.spin_period = lidar.spin_period;
    cloud.max_range = lidar.max_range;
    cloud.beams = beams;
    for (auto& p : out)
        if (p) cloud.points.push_back(*p);
    return cloud;
}

/// Static-scene convenience: the same snapshot for the whole sweep.
inline PointCloud render_lidar(const scene::SceneSnapshot& snapshot, const sensors::LidarModel& lidar, const Pose& extrinsic,
                               const hdmap::Trajectory& trajectory, double t0, std::uint64_t seed,
                               unsigned threads = default_threads()) {
    return render_lidar([&](double) -> const scene::SceneSnapshot& { return snapshot; }, lidar, extrinsic, trajectory, t0, seed,
                        threads);
}

} // namespace oasim::render
