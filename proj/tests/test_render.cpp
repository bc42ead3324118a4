#include <gtest/gtest.h>

#include <png.h>

#include <cmath>
#include <numbers>
#include <set>

#include "oasim/render/annotations.hpp"
#include "oasim/render/cloud_io.hpp"
#include "oasim/render/image_io.hpp"
#include "oasim/render/render.hpp"
#include "oasim/scene/scene_io.hpp"
#include "oasim/sensors/rig.hpp"
#include "support.hpp"

using namespace oasim;
using namespace oasim::render;

namespace {

scene::SceneSnapshot plane_scene() { return scene::compose(scene::SdfField(scene::Primitive{scene::Plane{{0, 0, 1}, 0.0}}), {}, {}, {}); }

sensors::LidarModel single_beam(double elevation_deg) {
    sensors::LidarModel l;
    l.elevations = {deg2rad(elevation_deg)};
    return l;
}

hdmap::Trajectory parked(const Vec3& at) { return hdmap::stationary_trajectory(Pose::from_xyz_yaw(at, 0.0), 0.0, 1.0); }

struct DecodedPng {
    unsigned width = 0, height = 0;
    std::vector<std::uint8_t> pixels;
};

DecodedPng decode(const Bytes& bytes, bool gray16) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    EXPECT_TRUE(png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()));
    img.format = gray16 ? PNG_FORMAT_LINEAR_Y : PNG_FORMAT_RGB;
    DecodedPng out{img.width, img.height, std::vector<std::uint8_t>(PNG_IMAGE_SIZE(img))};
    EXPECT_TRUE(png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr));
    return out;
}

} // namespace

TEST(Camera, EmptySceneIsAllSky) {
    const auto snap = scene::compose(scene::SdfField(scene::Primitive{scene::Sphere{{-1000, 0, 0}, 1.0}}), {}, {}, {});
    const sensors::CameraModel cam{64, 48, 50, 50, 32, 24, 0.1};
    const RenderFrame f = render_camera(snap, cam, test::camera_at({0, 0, 0}));
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_FALSE(f.valid(i));
        EXPECT_EQ(f.rgb[i], kSkyColor);
        EXPECT_EQ(f.instance[i], scene::kNoHitId);
    }
}

TEST(Camera, AxialSphereDepth) {
    auto ball = std::make_shared<scene::Asset>();
    ball->id = "ball";
    ball->shape = scene::SdfField(scene::Primitive{scene::Sphere{{0, 0, 1}, 1.0}});
    ball->size = {2, 2, 2};
    const auto snap = scene::compose(scene::SdfField(scene::Primitive{scene::Plane{{0, 0, 1}, -50.0}}), {}, {{"ball", ball}},
                                     {{"ball", Pose::from_xyz_yaw({5, 0, -1}, 0)}});
    const sensors::CameraModel cam{65, 49, 40, 40, 32.5, 24.5, 0.1};
    const RenderFrame f = render_camera(snap, cam, test::camera_at({0, 0, 0}));
    const std::size_t c = f.index(32, 24);
    EXPECT_NEAR(f.depth[c], 4.0, 2e-3);
    EXPECT_EQ(f.instance[c], 1);
    EXPECT_EQ(f.semantic[c], static_cast<std::uint16_t>(scene::SemanticClass::car));
    EXPECT_NEAR(f.normal[c].x, -1.0, 1e-3);
}

TEST(Camera, MatchesReferenceRendererAtAnyParallelism) {
    const auto sc = scene::load_scene(test::fixture_dir() / "scene.json");
    const auto snap = sc.compose_with({{"sedan", Pose::from_xyz_yaw({30, -1.75, 0}, 0.2)}});
    const sensors::CameraModel cam{160, 90, 80, 80, 80, 45, 0.1};
    const Pose pose = test::camera_at({10, -1.75, 1.6}, 0.05);
    const RenderFrame ref = test::reference_render(snap, cam, pose);
    for (unsigned threads : {1u, 3u, 8u}) {
        const RenderFrame f = render_camera(snap, cam, pose, threads);
        EXPECT_EQ(f.depth, ref.depth) << threads;
        EXPECT_EQ(f.instance, ref.instance) << threads;
        EXPECT_EQ(f, ref) << threads;
    }
}

TEST(Camera, PngEncodings) {
    const auto snap = plane_scene();
    const sensors::CameraModel cam{32, 24, 20, 20, 16, 12, 0.1};
    const Pose down{{0, 0, 5}, Quat::from_ypr(0, std::numbers::pi / 2, 0)};
    const RenderFrame f = render_camera(snap, cam, down);
    const Bytes rgb = encode_rgb_png(f);
    EXPECT_EQ(rgb, encode_rgb_png(f));
    const DecodedPng d = decode(rgb, false);
    EXPECT_EQ(d.width, 32u);
    EXPECT_EQ(d.height, 24u);
    EXPECT_EQ(d.pixels[0], to_u8(f.rgb[0].x));
    // depth in millimeters, big-endian 16-bit
    EXPECT_EQ(depth_to_mm(5.0), 5000);
    EXPECT_EQ(depth_to_mm(std::numeric_limits<double>::infinity()), 0);
    EXPECT_EQ(depth_to_mm(1e6), 65535);
    const Bytes depth = encode_depth_png(f);
    EXPECT_EQ(depth[0], 0x89);
    EXPECT_EQ(decode(depth, true).width, 32u);
}

TEST(Lidar, GroundRangeMatchesTrigonometry) {
    const auto snap = plane_scene();
    const PointCloud c = render_lidar(snap, single_beam(-30.0), Pose{{0, 0, 2}, {}}, parked({0, 0, 0}), 0.0, 1);
    ASSERT_EQ(c.points.size(), 1800u);
    for (const auto& p : c.points) {
        EXPECT_NEAR(p.range, 2.0 / std::sin(deg2rad(30.0)), 2e-3);
        EXPECT_NEAR(p.xyz.z, -2.0, 2e-3);
        EXPECT_EQ(p.instance, scene::kBackgroundId);
    }
}

TEST(Lidar, DropoutLimits) {
    const auto snap = plane_scene();
    sensors::LidarModel l = sensors::lidar_preset("spin-32");
    l.dropout = 0.999999;
    const PointCloud nearly_empty = render_lidar(snap, l, Pose{{0, 0, 2}, {}}, parked({0, 0, 0}), 0.0, 1);
    EXPECT_LT(nearly_empty.points.size(), 5u);
    l.dropout = 0.0;
    const PointCloud full = render_lidar(snap, l, Pose{{0, 0, 2}, {}}, parked({0, 0, 0}), 0.0, 1);
    std::size_t down = 0;
    for (double e : l.elevations)
        if (e < 0 && 2.0 / std::sin(-e) <= l.max_range) down += 1800;
    EXPECT_EQ(full.points.size(), down);
}

TEST(Lidar, RangeNoiseStatistics) {
    const auto snap = plane_scene();
    sensors::LidarModel l;
    l.elevations = {deg2rad(-40.0), deg2rad(-30.0), deg2rad(-20.0), deg2rad(-15.0), deg2rad(-10.0), deg2rad(-5.0)};
    l.range_noise = 0.02;
    const PointCloud c = render_lidar(snap, l, Pose{{0, 0, 2}, {}}, parked({0, 0, 0}), 0.0, 99);
    ASSERT_GE(c.points.size(), 10000u);
    double sum = 0, sq = 0;
    for (const auto& p : c.points) {
        const double r = p.range - 2.0 / std::sin(-l.elevations[p.ring]);
        sum += r;
        sq += r * r;
    }
    const double n = static_cast<double>(c.points.size());
    const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
    EXPECT_GE(sd, 0.016);
    EXPECT_LE(sd, 0.024);
}

TEST(Lidar, DeterministicAndSeeded) {
    const auto sc = scene::load_scene(test::fixture_dir() / "scene.json");
    const auto snap = sc.compose_with();
    sensors::LidarModel l = sensors::lidar_preset("spin-32");
    l.azimuth_step = deg2rad(1.0);
    l.range_noise = 0.05;
    const auto tr = parked({40, -1.75, 0});
    const PointCloud a = render_lidar(snap, l, Pose{{0, 0, 1.9}, {}}, tr, 0.0, 5, 1);
    const PointCloud b = render_lidar(snap, l, Pose{{0, 0, 1.9}, {}}, tr, 0.0, 5, 4);
    EXPECT_EQ(encode_cloud(a), encode_cloud(b));
    const PointCloud c = render_lidar(snap, l, Pose{{0, 0, 1.9}, {}}, tr, 0.0, 6, 4);
    EXPECT_NE(encode_cloud(a), encode_cloud(c));
}

TEST(Lidar, RollingSweepUsesColumnPoses) {
    // Vehicle moving at 10 m/s along +x: points are expressed in the sensor
    // frame at t0, so a ground hit from the last column sits ~1 m ahead of
    // where a static sweep would put it.
    hdmap::Trajectory tr;
    tr.dt = 0.01;
    for (int i = 0; i <= 20; ++i) tr.samples.push_back({i * 0.01, Pose::from_xyz_yaw({i * 0.1, 0, 0}, 0), 10.0, "", 0.0});
    const auto snap = plane_scene();
    const PointCloud c = render_lidar(snap, single_beam(-30.0), Pose{{0, 0, 2}, {}}, tr, 0.0, 1);
    ASSERT_EQ(c.points.size(), 1800u);
    const auto& last = c.points.back();
    const double az = 1799 * deg2rad(0.2);
    const double horiz = 2.0 / std::tan(deg2rad(30.0));
    EXPECT_NEAR(last.xyz.x, horiz * std::cos(az) + 10.0 * (last.timestamp - 0.0), 1e-6);
    EXPECT_NEAR(last.timestamp, 0.1 * (1.0 - 1.0 / 1800.0), 1e-12);
    EXPECT_ERROR_CODE(render_lidar(snap, single_beam(-30.0), Pose{}, tr, 0.15, 1), "TrajectoryGap");
}

TEST(Lidar, CloudRoundTrip) {
    const auto snap = plane_scene();
    const PointCloud c = render_lidar(snap, single_beam(-30.0), Pose{{0, 0, 2}, {}}, parked({0, 0, 0}), 0.25, 1);
    const Bytes data = encode_cloud(c);
    EXPECT_EQ(data.size(), c.points.size() * kCloudRecordBytes);
    const json header = cloud_header(c, "top", "top.bin");
    const PointCloud d = decode_cloud(data, header);
    ASSERT_EQ(d.points.size(), c.points.size());
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        EXPECT_EQ(d.points[i].timestamp, c.points[i].timestamp);
        EXPECT_EQ(d.points[i].ring, c.points[i].ring);
        EXPECT_EQ(d.points[i].range, static_cast<double>(static_cast<float>(c.points[i].range)));
    }
    EXPECT_EQ(encode_cloud(d), data);
    Bytes truncated(data.begin(), data.end() - 3);
    EXPECT_ERROR_CODE(decode_cloud(truncated, header), "Format");
}

TEST(Annotations, EmptyWithoutAgents) {
    EXPECT_TRUE(extract_annotations({}, Pose{}).objects.empty());
}

TEST(Annotations, EgoFrameTransform) {
    const auto sc = scene::load_scene(test::fixture_dir() / "scene.json");
    const Pose ego = Pose::from_xyz_yaw({5, 7, 0}, std::numbers::pi / 2);
    // 10 m ahead of an ego facing +y is +10 in world y
    const Actor other{2, 4, sc.assets.at("truck"), Pose::from_xyz_yaw({5, 17, 0}, std::numbers::pi / 2 + 0.1), 3.0, false};
    const Actor self{1, -1, sc.assets.at("sedan"), ego, 5.0, true};
    const FrameAnnotations a = extract_annotations({self, other}, ego);
    ASSERT_EQ(a.objects.size(), 1u);
    const BoxAnnotation& b = a.objects[0];
    EXPECT_EQ(b.id, 2);
    EXPECT_EQ(b.track, 4);
    EXPECT_EQ(b.cls, scene::SemanticClass::truck);
    EXPECT_NEAR(b.center.x, 10.0, 1e-9);
    EXPECT_NEAR(b.center.y, 0.0, 1e-9);
    EXPECT_NEAR(b.center.z, 1.6, 1e-9);
    EXPECT_NEAR(b.yaw, 0.1, 1e-12);
    EXPECT_EQ(b.size, sc.assets.at("truck")->size);
    const json j = annotations_json(a, 3, 0.3);
    EXPECT_EQ(j.at("objects").size(), 1u);
    EXPECT_EQ(j.at("objects")[0].at("class"), "vehicle.truck");
}
