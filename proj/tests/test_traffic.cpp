#include <gtest/gtest.h>

#include <map>

#include "oasim/hdmap/routing.hpp"
#include "oasim/scene/scene_io.hpp"
#include "oasim/traffic/idm.hpp"
#include "oasim/traffic/traffic.hpp"
#include "support.hpp"

using namespace oasim;
using namespace oasim::traffic;

namespace {

hdmap::LaneGraph long_lane() {
    return hdmap::parse_hdmap({{"lanes", json::array({test::lane_json("S", {{0, 0, 0}, {3000, 0, 0}})})}});
}

Agent agent_at(int id, double s, double v, double length = 4.5) {
    Agent a;
    a.id = id;
    a.asset_id = "sedan";
    a.length = length;
    a.route.steps.push_back({"S", hdmap::EntryMode::start, 0.0});
    a.s = s;
    a.v = v;
    return a;
}


std::vector<std::shared_ptr<const scene::Asset>> fixture_assets() {
    static const scene::SceneDescription sc = scene::load_scene(test::fixture_dir() / "scene.json");
    std::vector<std::shared_ptr<const scene::Asset>> out;
    for (const auto& id : sc.traffic_assets) out.push_back(sc.assets.at(id));
    return out;
}

} // namespace

TEST(Idm, FreeRoadAtDesiredSpeed) {
    EXPECT_DOUBLE_EQ(idm_accel(15.0, 0.0, kFreeRoad, TrafficParams{}), 0.0);
}

TEST(Idm, StandstillEquilibrium) {
    const TrafficParams p;
    EXPECT_DOUBLE_EQ(idm_accel(0.0, 0.0, p.s0, p), 0.0);
}

TEST(Idm, MatchesDirectFormula) {
    const TrafficParams p{15.0, 1.5, 2.0, 1.5, 2.0, 4.0, 0.05};
    const double v = 10.0, vl = 8.0, gap = 20.0;
    const double s_star = 2.0 + 10.0 * 1.5 + 10.0 * 2.0 / (2.0 * std::sqrt(1.5 * 2.0));
    const double expected = 1.5 * (1.0 - std::pow(10.0 / 15.0, 4.0) - (s_star / gap) * (s_star / gap));
    EXPECT_NEAR(idm_accel(v, vl, gap, p), expected, 1e-12);
}

TEST(Idm, InvalidParams) {
    TrafficParams p;
    p.T = 0.0;
    EXPECT_ERROR_CODE(validate_params(p), "Invalid");
}

TEST(Traffic, PresetCounts) {
    EXPECT_EQ(density_preset("ego-only").count, 0);
    EXPECT_EQ(density_preset("few").count, 5);
    EXPECT_EQ(density_preset("many").count, 25);
    EXPECT_ERROR_CODE(density_preset("crowded"), "Invalid");
}

TEST(Traffic, SpawnRespectsSeparation) {
    const auto g = hdmap::load_hdmap_file(test::fixture_dir() / "map.json");
    const TrafficParams p;
    for (const char* preset : {"ego-only", "few", "many"}) {
        const auto agents = spawn(g, density_preset(preset), fixture_assets(), 7, p);
        EXPECT_EQ(static_cast<int>(agents.size()), density_preset(preset).count);
        for (std::size_t i = 0; i < agents.size(); ++i)
            for (std::size_t j = 0; j < agents.size(); ++j) {
                if (i == j || agents[i].lane() != agents[j].lane()) continue;
                EXPECT_GE(std::abs(agents[i].s - agents[j].s), p.s0 + std::max(agents[i].length, agents[j].length) - 1e-9);
            }
        for (const auto& a : agents) EXPECT_TRUE(hdmap::route_is_connected(g, a.route));
    }
}

TEST(Traffic, SpawnDeterministic) {
    const auto g = hdmap::load_hdmap_file(test::fixture_dir() / "map.json");
    EXPECT_EQ(spawn(g, density_preset("many"), fixture_assets(), 3, {}), spawn(g, density_preset("many"), fixture_assets(), 3, {}));
    EXPECT_NE(spawn(g, density_preset("many"), fixture_assets(), 3, {}), spawn(g, density_preset("many"), fixture_assets(), 4, {}));
}

TEST(Traffic, SpawnInfeasible) {
    const auto g = hdmap::parse_hdmap({{"lanes", json::array({test::lane_json("S", {{0, 0, 0}, {30, 0, 0}})})}});
    EXPECT_ERROR_CODE(spawn(g, density_preset("many"), fixture_assets(), 1, {}), "SpawnInfeasible");
}

TEST(Traffic, ZeroStepsLeavesWorldUnchanged) {
    const auto g = long_lane();
    World w;
    w.agents = {agent_at(1, 10, 3)};
    EXPECT_EQ(simulate_until(g, w, nullptr, {}, 0.0), w);
}

TEST(Traffic, FreeAgentApproachesDesiredSpeed) {
    const auto g = long_lane();
    const TrafficParams p;
    World w;
    w.agents = {agent_at(1, 0, 0)};
    double prev = 0.0;
    for (int k = 0; k < 1200; ++k) {
        w = step(g, w, nullptr, p);
        ASSERT_EQ(w.agents.size(), 1u);
        EXPECT_GE(w.agents[0].v, prev);
        EXPECT_LE(w.agents[0].v, p.v0 + 1e-6);
        prev = w.agents[0].v;
    }
    EXPECT_GT(prev, 0.99 * p.v0);
}

TEST(Traffic, FollowerStopsBehindStoppedLeader) {
    const auto g = long_lane();
    const TrafficParams p;
    // stationary ego 100 m ahead acts as the stopped leader
    hdmap::Trajectory ego;
    ego.dt = p.dt;
    for (int i = 0; i <= 1300; ++i) ego.samples.push_back({i * p.dt, Pose::from_xyz_yaw({100, 0, 0}, 0), 0.0, "S", 100.0});
    World w;
    w.agents = {agent_at(1, 0, p.v0)};
    double min_gap = 1e9;
    for (int k = 0; k < 1200; ++k) {
        w = step(g, w, &ego, p);
        min_gap = std::min(min_gap, 100.0 - w.agents[0].s - 4.5);
    }
    EXPECT_GT(min_gap, 0.0);
    EXPECT_LT(w.agents[0].v, 0.05);
}

TEST(Traffic, PlatoonStaysCollisionFree) {
    const auto g = long_lane();
    const TrafficParams p;
    World w;
    for (int i = 0; i < 10; ++i) w.agents.push_back(agent_at(i + 1, 600.0 - 45.0 * i, i == 0 ? 0.0 : p.v0, i % 3 == 0 ? 12.0 : 4.5));
    for (int k = 0; k < 1200; ++k) {
        w = step(g, w, nullptr, p);
        ASSERT_GT(test::min_same_lane_gap(w), 0.0) << "step " << k;
    }
}

TEST(Traffic, AgentsFollowRoutesAndDespawn) {
    const auto g = hdmap::load_hdmap_file(test::fixture_dir() / "map.json");
    World w;
    w.agents = spawn(g, density_preset("few"), fixture_assets(), 11, {});
    w = simulate_until(g, w, nullptr, {}, 120.0);
    EXPECT_TRUE(w.agents.empty());
    EXPECT_NEAR(w.time, 120.0, 1e-6);
}

TEST(Traffic, AgentPoseOnCenterline) {
    const auto g = hdmap::load_hdmap_file(test::fixture_dir() / "map.json");
    Agent a = agent_at(1, 20.0, 0.0);
    a.route.steps[0].lane = "A2";
    const Pose pose = agent_pose(g, a);
    EXPECT_NEAR(pose.translation.x, 20.0, 1e-9);
    EXPECT_NEAR(pose.translation.y, 1.75, 1e-9);
}

TEST(Traffic, ReservedHeadwayStaysClear) {
    const auto g = long_lane();
    const auto opts = ego_spawn_options("S", 4.5, 10.0);
    EXPECT_DOUBLE_EQ(opts.reserved_headway, kEgoClearTime * 10.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        for (const auto& a : spawn(g, density_preset("many"), fixture_assets(), seed, {}, opts))
            EXPECT_GE(a.s, 2.0 + std::max(4.5, a.length) + 60.0 - 1e-9) << seed;
}
