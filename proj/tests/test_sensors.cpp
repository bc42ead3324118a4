#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <set>

#include "oasim/sensors/camera.hpp"
#include "oasim/sensors/lidar.hpp"
#include "oasim/sensors/rig.hpp"
#include "support.hpp"

using namespace oasim;
using namespace oasim::sensors;

namespace {

void expect_near(const Vec3& a, const Vec3& b, double tol) {
    EXPECT_NEAR(a.x, b.x, tol);
    EXPECT_NEAR(a.y, b.y, tol);
    EXPECT_NEAR(a.z, b.z, tol);
}

} // namespace

TEST(Camera, PrincipalAxisRay) {
    const CameraModel c{640, 480, 500, 500, 320, 240, 0.1};
    EXPECT_EQ(pixel_ray(c, 320, 240), (Vec3{0, 0, 1}));
}

TEST(Camera, FortyFiveDegreeRay) {
    const CameraModel c{2000, 480, 500, 500, 320, 240, 0.1};
    expect_near(pixel_ray(c, 820, 240), normalized(Vec3{1, 0, 1}), 1e-15);
}

TEST(Camera, OutOfImage) {
    const CameraModel c{640, 480, 500, 500, 320, 240, 0.1};
    EXPECT_ERROR_CODE(pixel_ray(c, 640, 10), "OutOfImage");
    EXPECT_ERROR_CODE(pixel_ray(c, -0.5, 10), "OutOfImage");
}

TEST(Camera, ProjectFormula) {
    const CameraModel c{640, 480, 500, 500, 320, 240, 0.1};
    const Pixel a = project(c, {0, 0, 5});
    EXPECT_EQ(a.u, 320);
    EXPECT_EQ(a.v, 240);
    EXPECT_EQ(project(c, {1, 0, 1}).u, 820);
    EXPECT_ERROR_CODE(project(c, {0, 0, 0.05}), "BehindCamera");
}

TEST(Camera, RayProjectRoundTrip) {
    const CameraModel c{1920, 1080, 1234.5, 1100.0, 950.0, 530.0, 0.1};
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> uu(0, 1920), uv(0, 1080);
    for (int i = 0; i < 2000; ++i) {
        const double u = uu(rng), v = uv(rng);
        const Vec3 d = pixel_ray(c, u, v);
        const Pixel p = project(c, d * (7.0 / d.z));
        EXPECT_NEAR(p.u, u, 1e-6);
        EXPECT_NEAR(p.v, v, 1e-6);
    }
}

TEST(Camera, OpticalBodyConvention) {
    EXPECT_EQ(optical_to_body({0, 0, 1}), (Vec3{1, 0, 0}));   // forward
    EXPECT_EQ(optical_to_body({1, 0, 0}), (Vec3{0, -1, 0}));  // image right is body right
    EXPECT_EQ(optical_to_body({0, 1, 0}), (Vec3{0, 0, -1}));  // image down
    EXPECT_EQ(body_to_optical(optical_to_body({0.1, 0.2, 0.3})), (Vec3{0.1, 0.2, 0.3}));
}

TEST(Camera, PresetsAndFov) {
    const CameraModel wide = camera_preset("wide"), tele = camera_preset("tele");
    EXPECT_EQ(wide.fx, 1000.0);
    EXPECT_EQ(tele.fx, 4000.0);
    EXPECT_NEAR(std::tan(horizontal_fov(wide) / 2), 4.0 * std::tan(horizontal_fov(tele) / 2), 1e-9);
    const CameraModel half = wide.scaled(960, 540);
    EXPECT_NEAR(horizontal_fov(half), horizontal_fov(wide), 1e-12);
    EXPECT_ERROR_CODE(camera_preset("fisheye"), "Invalid");
}

TEST(Camera, Validation) {
    CameraModel c{640, 480, 0.0, 500, 320, 240, 0.1};
    EXPECT_ERROR_CODE(validate_camera(c), "Invalid");
    c.fx = 500;
    c.cx = 700;
    EXPECT_ERROR_CODE(validate_camera(c), "Invalid");
}

TEST(Lidar, RayCountAndTiming) {
    const LidarModel l = lidar_preset("spin-32");
    EXPECT_EQ(l.columns(), 1800);
    const auto rays = lidar_rays(l, 2.0);
    EXPECT_EQ(rays.size(), 57600u);
    EXPECT_NEAR(rays.back().time - 2.0, l.spin_period * (1.0 - 1.0 / 1800.0), 1e-12);
    std::set<double> elev;
    for (const auto& r : rays) elev.insert(r.elevation);
    EXPECT_EQ(elev, std::set<double>(l.elevations.begin(), l.elevations.end()));
}

TEST(Lidar, Presets) {
    EXPECT_EQ(lidar_preset("spin-32").beams(), 32);
    EXPECT_EQ(lidar_preset("spin-64").beams(), 64);
    EXPECT_ERROR_CODE(lidar_preset("spin-128"), "Invalid");
}

TEST(Lidar, Validation) {
    LidarModel l = lidar_preset("spin-32");
    l.dropout = 1.0;
    EXPECT_ERROR_CODE(validate_lidar(l), "Invalid");
    l = lidar_preset("spin-32");
    std::swap(l.elevations[0], l.elevations[1]);
    EXPECT_ERROR_CODE(validate_lidar(l), "Invalid");
    l = lidar_preset("spin-32");
    l.azimuth_step = deg2rad(0.7);
    EXPECT_ERROR_CODE(validate_lidar(l), "Invalid");
}

TEST(Lidar, DirectionConvention) {
    expect_near(lidar_direction(0, 0), {1, 0, 0}, 1e-15);
    expect_near(lidar_direction(0, std::numbers::pi / 2), {0, 1, 0}, 1e-15);
    expect_near(lidar_direction(-std::numbers::pi / 6, 0), {std::cos(std::numbers::pi / 6), 0, -0.5}, 1e-15);
}

TEST(Rig, IdentityExtrinsic) {
    SensorRig rig{{Sensor{"cam", CameraModel{}, Pose{}}}};
    const Pose v = Pose::from_xyz_yaw({3, 4, 5}, 0.7);
    EXPECT_EQ(sensor_pose_world(rig, v, "cam").translation, v.translation);
    EXPECT_NEAR(sensor_pose_world(rig, v, "cam").yaw(), 0.7, 1e-15);
}

TEST(Rig, QuarterTurnVehicle) {
    SensorRig rig{{Sensor{"cam", CameraModel{}, Pose{{1, 0, 0}, {}}}}};
    const Pose v = Pose::from_xyz_yaw({10, 20, 0}, std::numbers::pi / 2);
    expect_near(sensor_pose_world(rig, v, "cam").translation - v.translation, {0, 1, 0}, 1e-15);
}

TEST(Rig, ComposeThenInvertRecoversExtrinsic) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 500; ++i) {
        const Pose v{{u(rng), u(rng), u(rng)}, Quat{u(rng), u(rng), u(rng), u(rng)}.normalized()};
        const Pose e{{u(rng), u(rng), u(rng)}, Quat{u(rng), u(rng), u(rng), u(rng)}.normalized()};
        const Pose back = compose(v.inverse(), compose(v, e));
        expect_near(back.translation, e.translation, 1e-9);
        const Quat q = back.rotation, r = e.rotation;
        EXPECT_NEAR(std::abs(q.w * r.w + q.x * r.x + q.y * r.y + q.z * r.z), 1.0, 1e-9);
    }
}

TEST(Rig, UnknownSensor) {
    SensorRig rig{{Sensor{"cam", CameraModel{}, Pose{}}}};
    EXPECT_ERROR_CODE(sensor_pose_world(rig, Pose{}, "lidar"), "UnknownSensor");
}

TEST(Rig, FixtureRoundTrip) {
    const SensorRig rig = load_rig_file(test::fixture_dir() / "rig.json");
    ASSERT_EQ(rig.sensors.size(), 3u);
    EXPECT_EQ(rig.sensor("top").lidar().beams(), 32);
    const SensorRig again = parse_rig(rig_json(rig));
    EXPECT_EQ(rig_json(again), rig_json(rig));
    EXPECT_EQ(again.sensor("front").camera().fx, 250.0);
}

TEST(Rig, InvalidDocuments) {
    EXPECT_ERROR_CODE(parse_rig(json::parse(R"({"sensors":[{"id":"c","kind":"camera","model":{"fx":0}}]})")), "Invalid");
    EXPECT_ERROR_CODE(parse_rig(json::parse(R"({"sensors":[{"id":"c","kind":"radar"}]})")), "Invalid");
    EXPECT_ERROR_CODE(parse_rig(json::parse(R"({"sensors":[{"id":"c","kind":"camera"},{"id":"c","kind":"camera"}]})")), "Invalid");
    EXPECT_ERROR_CODE(parse_rig(json::parse(R"({"sensors":[{"id":"c","kind":"camera","model":{"width":"wide"}}]})")), "Invalid");
}
