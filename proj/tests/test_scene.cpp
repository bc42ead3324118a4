#include <gtest/gtest.h>

#include <random>

#include "oasim/scene/scene.hpp"
#include "oasim/scene/scene_io.hpp"
#include "support.hpp"

using namespace oasim;
using namespace oasim::scene;

namespace {

std::shared_ptr<const Asset> sphere_asset(const std::string& id, double r) {
    auto a = std::make_shared<Asset>();
    a->id = id;
    a->cls = SemanticClass::car;
    a->shape = SdfField(Primitive{Sphere{{0, 0, r}, r}});
    a->size = {2 * r, 2 * r, 2 * r};
    return a;
}

SdfField far_plane() { return SdfField(Primitive{Plane{{0, 0, 1}, -100.0}}); }

} // namespace

TEST(Scene, InstanceInsideWins) {
    AssetLibrary lib{{"ball", sphere_asset("ball", 1.0)}};
    // background at distance 3 from the query point, the instance at -0.5
    const auto snap = compose(SdfField(Primitive{Plane{{0, 0, 1}, -3.0}}), {}, lib, {{"ball", Pose::from_xyz_yaw({0, 0, -1}, 0)}});
    const Sample s = snap.query({0, 0, 0.5});
    EXPECT_DOUBLE_EQ(s.distance, -0.5);
    EXPECT_EQ(s.instance, 1);
}

TEST(Scene, TiesGoToLowerId) {
    AssetLibrary lib{{"ball", sphere_asset("ball", 1.0)}};
    const auto snap = compose(far_plane(), {}, lib,
                              {{"ball", Pose::from_xyz_yaw({-1.2, 0, -1}, 0)}, {"ball", Pose::from_xyz_yaw({1.2, 0, -1}, 0)}});
    const Sample s = snap.query({0, 0, 0});
    EXPECT_NEAR(s.distance, 0.2, 1e-15);
    EXPECT_EQ(s.instance, 1);
}

TEST(Scene, TranslationInvariance) {
    AssetLibrary lib{{"ball", sphere_asset("ball", 1.0)}};
    const auto snap = compose(far_plane(), {}, lib, {{"ball", Pose::from_xyz_yaw({10, 0, -1}, 0)}});
    EXPECT_DOUBLE_EQ(snap.distance({12, 0, 0}), 1.0);
}

TEST(Scene, UnknownAssetRejected) {
    EXPECT_ERROR_CODE(compose(far_plane(), {}, {}, {{"ghost", Pose{}}}), "UnknownAsset");
}

TEST(Scene, ClassTable) {
    AssetLibrary lib{{"ball", sphere_asset("ball", 1.0)}};
    const auto snap = compose(far_plane(), {}, lib, {{"ball", Pose{}}});
    EXPECT_EQ(snap.class_of(kBackgroundId), SemanticClass::background);
    EXPECT_EQ(snap.class_of(1), SemanticClass::car);
    EXPECT_EQ(snap.class_of(2), SemanticClass::none);
}

TEST(Scene, FixtureLoads) {
    const SceneDescription d = load_scene(test::fixture_dir() / "scene.json");
    EXPECT_EQ(d.assets.size(), 4u);
    EXPECT_EQ(d.placements.size(), 3u);
    EXPECT_EQ(d.traffic_assets.size(), 3u);
    const SceneSnapshot s = d.compose_with();
    EXPECT_EQ(s.instances().size(), 3u);
    EXPECT_TRUE(s.surface_top().has_value());
}

TEST(Scene, CulledQueryEqualsNaiveQuery) {
    // Rotated instances and the fixture background, sampled at random
    // points, against the unculled reference.
    SceneDescription d = load_scene(test::fixture_dir() / "scene.json");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-10, 310), uy(-30, 30), uz(-1, 20), yaw(-3.2, 3.2);
    std::vector<Placement> extra;
    const char* ids[] = {"sedan", "truck", "bus", "ball"};
    for (int i = 0; i < 30; ++i) extra.push_back({ids[i % 4], Pose::from_xyz_yaw({ux(rng), uy(rng) / 4, 0}, yaw(rng))});
    const SceneSnapshot s = d.compose_with(extra);
    for (int n = 0; n < 50000; ++n) {
        const Vec3 p{ux(rng), uy(rng), uz(rng)};
        const Sample a = s.query(p), b = test::naive_query(s, p);
        ASSERT_EQ(a.distance, b.distance);
        ASSERT_EQ(a.instance, b.instance);
    }
}

TEST(Scene, MalformedDocuments) {
    EXPECT_ERROR_CODE(parse_scene(json::parse(R"({"background":{"type":"cone"}})"), "."), "Format");
    EXPECT_ERROR_CODE(parse_scene(json::parse(R"({"background":{"type":"sphere","center":[0,0,0],"radius":-1}})"), "."), "Invalid");
    EXPECT_ERROR_CODE(parse_scene(json::parse(R"({"background":{"type":"sphere","center":[0,0,0],"radius":1},
        "instances":[{"asset":"nope","translation":[0,0,0]}]})"), "."),
                      "UnknownAsset");
}

TEST(Scene, GridFileRoundTrip) {
    const auto dir = test::scratch_dir("grid");
    const SampledGrid g = sample_grid(SdfField(Primitive{Sphere{{0, 0, 0}, 1.0}}), {-1.5, -1.5, -1.5}, 0.1, {31, 31, 31});
    write_grid_values(dir / "ball.f32", g.values);
    json doc = json::parse(R"({"background":{"type":"grid","origin":[-1.5,-1.5,-1.5],"cell":0.1,"dims":[31,31,31],"file":"ball.f32"}})");
    const SceneDescription d = parse_scene(doc, dir);
    EXPECT_EQ(d.background.eval(g.node(3, 4, 5)), static_cast<double>(g.at(3, 4, 5)));
    json bad = doc;
    bad["background"]["dims"] = json::array({31, 31, 30});
    EXPECT_ANY_THROW(parse_scene(bad, dir));
    std::filesystem::remove_all(dir);
}
