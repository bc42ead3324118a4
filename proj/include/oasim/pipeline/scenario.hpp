#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/hdmap/lane_graph.hpp"
#include "oasim/hdmap/routing.hpp"
#include "oasim/hdmap/trajectory.hpp"
#include "oasim/json_util.hpp"
#include "oasim/pipeline/sha256.hpp"
#include "oasim/scene/scene_io.hpp"
#include "oasim/sensors/rig.hpp"
#include "oasim/traffic/traffic.hpp"

namespace oasim::pipeline {

namespace fs = std::filesystem;

/// A generation job: which inputs, how the ego drives, how much traffic,
/// and the sampling of the output. Refs are kept as written and resolved
/// against `base_dir`.
struct ScenarioSpec {
    fs::path base_dir;
    std::string source_ref = "inline";  // scenario file name, for the manifest
    std::string scene_ref = "scene.json";
    std::string map_ref = "map.json";
    std::string rig_ref = "rig.json";
    std::optional<json> rig_inline;  // replaces rig_ref when set

    std::string ego_start, ego_goal;
    std::string ego_asset;  // empty: default 4.5 m car length
    std::vector<hdmap::Maneuver> maneuvers;
    hdmap::MotionProfile profile{10.0, 2.0, 0.05, 30.0};

    std::string density = "ego-only";
    std::optional<int> agent_count;
    std::vector<std::string> traffic_assets;  // empty: the scene's default pool
    traffic::TrafficParams traffic;

    double frame_rate = 10.0;
    double duration = 1.0;
    std::uint64_t seed = 0;
    bool write_depth = false;
    unsigned threads = 0;  // 0: default_threads(); never affects output

    int frame_count() const { return static_cast<int>(std::llround(frame_rate * duration)); }
    fs::path scene_path() const { return base_dir / scene_ref; }
    fs::path map_path() const { return base_dir / map_ref; }
    fs::path rig_path() const { return base_dir / rig_ref; }
};

inline void validate_spec(const ScenarioSpec& s) {
    if (!(s.frame_rate > 0.0) || !std::isfinite(s.frame_rate)) fail("Invalid", "frame_rate must be > 0");
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) fail("Invalid", "duration must be > 0");
    if (s.frame_rate * s.duration < 1.0 - 1e-9) fail("Invalid", "duration * frame_rate must be >= 1");
    if (s.ego_start.empty() || s.ego_goal.empty()) fail("Invalid", "ego start and goal lanes are required");
    hdmap::validate_profile(s.profile);
    traffic::validate_params(s.traffic);
}

namespace detail {

inline hdmap::Maneuver parse_maneuver(const json& m) {
    hdmap::Maneuver out;
    out.kind = hdmap::parse_maneuver_kind(get_string(m, "kind", "Invalid"));
    out.s = get_number_or(m, "s", 0.0, "Invalid");
    if (m.contains("target")) out.target = get_string(m, "target", "Invalid");
    out.speed = get_number_or(m, "speed", 0.0, "Invalid");
    return out;
}

inline json maneuver_json(const hdmap::Maneuver& m) {
    json j = {{"kind", hdmap::to_string(m.kind)}, {"s", m.s}};
    if (!m.target.empty()) j["target"] = m.target;
    if (m.kind == hdmap::Maneuver::Kind::speed_set) j["speed"] = m.speed;
    return j;
}

inline traffic::TrafficParams parse_traffic_params(const json& j, traffic::TrafficParams p) {
    p.v0 = get_number_or(j, "v0", p.v0, "Invalid");
    p.T = get_number_or(j, "T", p.T, "Invalid");
    p.s0 = get_number_or(j, "s0", p.s0, "Invalid");
    p.a_max = get_number_or(j, "a_max", p.a_max, "Invalid");
    p.b = get_number_or(j, "b", p.b, "Invalid");
    p.delta = get_number_or(j, "delta", p.delta, "Invalid");
    p.dt = get_number_or(j, "dt", p.dt, "Invalid");
    return p;
}

} // namespace detail

/// Parses a scenario document; relative refs resolve against `base_dir`.
inline ScenarioSpec parse_scenario(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) fail("Invalid", "scenario must be a JSON object");
    ScenarioSpec s;
    s.base_dir = base_dir;
    try {
        if (doc.contains("scene")) s.scene_ref = get_string(doc, "scene", "Invalid");
        if (doc.contains("map")) s.map_ref = get_string(doc, "map", "Invalid");
        if (doc.contains("rig")) {
            if (doc.at("rig").is_object()) s.rig_inline = doc.at("rig");
            else s.rig_ref = get_string(doc, "rig", "Invalid");
        }
        const json& ego = member(doc, "ego", "Invalid");
        s.ego_start = get_string(ego, "start", "Invalid");
        s.ego_goal = get_string(ego, "goal", "Invalid");
        if (ego.contains("asset")) s.ego_asset = get_string(ego, "asset", "Invalid");
        if (ego.contains("profile")) {
            const json& p = ego.at("profile");
            s.profile.cruise_speed = get_number_or(p, "cruise_speed", s.profile.cruise_speed, "Invalid");
            s.profile.accel = get_number_or(p, "accel", s.profile.accel, "Invalid");
            s.profile.dt = get_number_or(p, "dt", s.profile.dt, "Invalid");
            s.profile.lane_change_distance = get_number_or(p, "lane_change_distance", s.profile.lane_change_distance, "Invalid");
        }
        if (doc.contains("maneuvers"))
            for (const auto& m : doc.at("maneuvers")) s.maneuvers.push_back(detail::parse_maneuver(m));
        if (doc.contains("traffic")) {
            const json& t = doc.at("traffic");
            if (t.contains("preset")) s.density = get_string(t, "preset", "Invalid");
            if (t.contains("count")) s.agent_count = t.at("count").get<int>();
            if (t.contains("assets"))
                for (const auto& a : t.at("assets")) s.traffic_assets.push_back(a.get<std::string>());
            if (t.contains("params")) s.traffic = detail::parse_traffic_params(t.at("params"), s.traffic);
        }
        s.frame_rate = get_number_or(doc, "frame_rate", s.frame_rate, "Invalid");
        s.duration = get_number_or(doc, "duration", s.duration, "Invalid");
        if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("write_depth")) s.write_depth = doc.at("write_depth").get<bool>();
    } catch (const json::exception& e) {
        fail("Invalid", std::string("malformed scenario: ") + e.what());
    }
    (void)traffic::density_preset(s.density, s.agent_count);
    validate_spec(s);
    return s;
}

inline ScenarioSpec load_scenario(const fs::path& path) {
    ScenarioSpec s = parse_scenario(read_json_file(path, "Invalid"), path.parent_path());
    s.source_ref = path.filename().string();
    return s;
}

/// Document form of a spec (refs as written, base_dir omitted).
inline json scenario_json(const ScenarioSpec& s) {
    json maneuvers = json::array();
    for (const auto& m : s.maneuvers) maneuvers.push_back(detail::maneuver_json(m));
    json ego = {{"start", s.ego_start},
                {"goal", s.ego_goal},
                {"profile",
                 {{"cruise_speed", s.profile.cruise_speed},
                  {"accel", s.profile.accel},
                  {"dt", s.profile.dt},
                  {"lane_change_distance", s.profile.lane_change_distance}}}};
    if (!s.ego_asset.empty()) ego["asset"] = s.ego_asset;
    json tr = {{"preset", s.density},
               {"assets", s.traffic_assets},
               {"params",
                {{"v0", s.traffic.v0},
                 {"T", s.traffic.T},
                 {"s0", s.traffic.s0},
                 {"a_max", s.traffic.a_max},
                 {"b", s.traffic.b},
                 {"delta", s.traffic.delta},
                 {"dt", s.traffic.dt}}}};
    if (s.agent_count) tr["count"] = *s.agent_count;
    json doc = {{"scene", s.scene_ref},
                {"map", s.map_ref},
                {"ego", ego},
                {"maneuvers", maneuvers},
                {"traffic", tr},
                {"frame_rate", s.frame_rate},
                {"duration", s.duration},
                {"seed", s.seed},
                {"write_depth", s.write_depth}};
    doc["rig"] = s.rig_inline ? *s.rig_inline : json(s.rig_ref);
    return doc;
}

/// Loaded and derived state for a spec: inputs, the ego route and its
/// trajectory (held at rest past the route end), and the t = 0 traffic.
struct PreparedJob {
    ScenarioSpec spec;
    scene::SceneDescription scene;
    std::shared_ptr<const hdmap::LaneGraph> map;
    sensors::SensorRig rig;
    hdmap::Route route;
    hdmap::Trajectory ego;
    std::shared_ptr<const scene::Asset> ego_asset;
    double ego_length = 4.5;
    traffic::World world0;
};

inline double max_sweep_period(const sensors::SensorRig& rig) {
    double p = 0.0;
    for (const auto& s : rig.sensors)
        if (s.kind() == sensors::SensorKind::lidar) p = std::max(p, s.lidar().spin_period);
    return p;
}

inline hdmap::Route plan_with_maneuvers(const hdmap::LaneGraph& g, const std::string& start, const std::string& goal,
                                        const std::vector<hdmap::Maneuver>& maneuvers) {
    hdmap::Route r = hdmap::plan_route(g, start, goal);
    for (const auto& m : maneuvers) r = hdmap::apply_maneuver(g, r, m);
    return r;
}

inline std::vector<std::shared_ptr<const scene::Asset>> traffic_asset_list(const scene::SceneDescription& sc,
                                                                           std::vector<std::string> ids) {
    std::vector<std::shared_ptr<const scene::Asset>> out;
    if (ids.empty()) ids = sc.traffic_assets;
    if (ids.empty()) {
        for (const auto& [id, a] : sc.assets) out.push_back(a);
        return out;
    }
    for (const auto& id : ids) {
        const auto it = sc.assets.find(id);
        if (it == sc.assets.end()) fail("UnknownAsset", "traffic asset '" + id + "' is not in the scene library");
        out.push_back(it->second);
    }
    return out;
}

inline sensors::SensorRig load_spec_rig(const ScenarioSpec& s) {
    return s.rig_inline ? sensors::parse_rig(*s.rig_inline) : sensors::load_rig_file(s.rig_path());
}

inline PreparedJob prepare_job(const ScenarioSpec& spec) {
    validate_spec(spec);
    PreparedJob job;
    job.spec = spec;
    job.scene = scene::load_scene(spec.scene_path());
    job.map = std::make_shared<const hdmap::LaneGraph>(hdmap::load_hdmap_file(spec.map_path()));
    job.rig = load_spec_rig(spec);
    const hdmap::LaneGraph& g = *job.map;

    if (!spec.ego_asset.empty()) {
        const auto it = job.scene.assets.find(spec.ego_asset);
        if (it == job.scene.assets.end()) fail("UnknownAsset", "ego asset '" + spec.ego_asset + "' is not in the scene library");
        job.ego_asset = it->second;
        job.ego_length = it->second->length();
    }
    job.route = plan_with_maneuvers(g, spec.ego_start, spec.ego_goal, spec.maneuvers);
    const double last_frame = static_cast<double>(spec.frame_count() - 1) / spec.frame_rate;
    job.ego = hdmap::extend_hold(hdmap::generate_trajectory(g, job.route, spec.profile),
                                 last_frame + max_sweep_period(job.rig) + spec.profile.dt);

    const auto opts = traffic::ego_spawn_options(spec.ego_start, job.ego_length, spec.profile.cruise_speed);
    job.world0.agents = traffic::spawn(g, traffic::density_preset(spec.density, spec.agent_count),
                                       traffic_asset_list(job.scene, spec.traffic_assets), spec.seed, spec.traffic, opts);
    return job;
}

} // namespace oasim::pipeline
