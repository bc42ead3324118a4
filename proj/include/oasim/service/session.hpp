#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/hdmap/lane_graph.hpp"
#include "oasim/hdmap/routing.hpp"
#include "oasim/hdmap/trajectory.hpp"
#include "oasim/json_util.hpp"
#include "oasim/pipeline/scenario.hpp"
#include "oasim/render/cloud_io.hpp"
#include "oasim/render/image_io.hpp"
#include "oasim/render/render.hpp"
#include "oasim/scene/scene_io.hpp"
#include "oasim/sensors/rig.hpp"
#include "oasim/traffic/traffic.hpp"

namespace oasim::service {

namespace fs = std::filesystem;

/// Resolves a data-root-relative reference; refuses absolute paths and
/// paths that climb out of the root.
inline fs::path resolve_ref(const fs::path& root, const std::string& ref) {
    if (ref.empty()) fail("Invalid", "empty reference");
    const fs::path rel(ref);
    if (rel.is_absolute()) fail("Invalid", "reference '" + ref + "' must be relative to the data root");
    for (const auto& part : rel)
        if (part == "..") fail("Invalid", "reference '" + ref + "' leaves the data root");
    const fs::path p = root / rel;
    if (!fs::exists(p)) fail("NotFound", "reference '" + ref + "' does not exist");
    return p;
}

/// Immutable state of a session at one revision. Edits publish a new one;
/// readers keep whichever they grabbed.
struct SessionState {
    std::uint64_t revision = 0;
    std::string scene_ref, map_ref, rig_ref;
    std::shared_ptr<const scene::SceneDescription> scene;
    std::shared_ptr<const hdmap::LaneGraph> map;
    sensors::SensorRig rig;
    std::optional<json> rig_inline;  // set once the rig is replaced through the API

    std::string start, goal;
    std::vector<hdmap::Maneuver> maneuvers;
    std::optional<hdmap::Route> route;
    std::optional<hdmap::Trajectory> trajectory;
    hdmap::MotionProfile profile{10.0, 2.0, 0.05, 30.0};
    double ego_length = 4.5;

    std::string density = "ego-only";
    std::optional<int> agent_count;
    std::uint64_t traffic_seed = 0;
    traffic::TrafficParams traffic_params;
    traffic::World world0;

    sensors::CameraModel free_camera{640, 480, 320.0, 320.0, 320.0, 240.0, 0.1};
    Pose free_pose;
};

/// Free camera `height` metres above `target`, looking straight down with
/// image up along world +x.
inline Pose look_down_pose(const Vec3& target, double height) {
    return {target + Vec3{0.0, 0.0, height}, Quat::from_ypr(0.0, std::numbers::pi / 2, 0.0)};
}

inline json route_geometry_json(const SessionState& s) {
    json out = {{"revision", s.revision}};
    if (!s.route) {
        out["route"] = nullptr;
        out["polyline"] = json::array();
        return out;
    }
    const auto path = hdmap::build_route_path(*s.map, *s.route, s.profile.lane_change_distance);
    json pts = json::array();
    for (const auto& p : path.points) pts.push_back(vec3_json(p));
    out["route"] = hdmap::route_json(*s.route);
    out["length"] = hdmap::route_length(*s.map, *s.route);
    out["polyline"] = pts;
    out["trajectory"] = {{"start", s.trajectory->start_time()}, {"end", s.trajectory->end_time()}, {"dt", s.trajectory->dt}};
    return out;
}

inline json session_state_json(const std::string& id, const SessionState& s) {
    json maneuvers = json::array();
    for (const auto& m : s.maneuvers) maneuvers.push_back(pipeline::detail::maneuver_json(m));
    json out = {{"id", id},
                {"revision", s.revision},
                {"scene", s.scene_ref},
                {"map", s.map_ref},
                {"rig", sensors::rig_json(s.rig)},
                {"start", s.start.empty() ? json(nullptr) : json(s.start)},
                {"goal", s.goal.empty() ? json(nullptr) : json(s.goal)},
                {"maneuvers", maneuvers},
                {"route", s.route ? hdmap::route_json(*s.route) : json(nullptr)},
                {"traffic", {{"preset", s.density}, {"seed", s.traffic_seed}, {"world", traffic::world_json(s.world0)}}},
                {"free_camera", {{"pose", pose_json(s.free_pose)}}}};
    return out;
}

/// Render request: a rig sensor, or the free camera when `sensor` is empty.
struct PreviewRequest {
    std::string sensor;
    double t = 0.0;
    std::string channel = "rgb";   // rgb | depth (cameras)
    std::optional<Pose> pose;      // free camera override
};

struct PreviewResult {
    std::uint64_t revision = 0;
    std::string content_type;
    render::Bytes body;
};

/// Scene at time t: static placements plus traffic advanced from t = 0.
inline scene::SceneSnapshot snapshot_at(const SessionState& s, double t) {
    const hdmap::Trajectory* ego = s.trajectory ? &*s.trajectory : nullptr;
    const traffic::World w = traffic::simulate_until(*s.map, s.world0, ego, s.traffic_params, t, s.ego_length);
    return s.scene->compose_with(traffic::agent_placements(*s.map, w));
}

inline PreviewResult render_preview(const SessionState& s, const PreviewRequest& req, unsigned threads = default_threads()) {
    if (!std::isfinite(req.t) || req.t < 0.0) fail("OutOfRange", "preview time must be finite and >= 0");
    PreviewResult out;
    out.revision = s.revision;
    Pose camera_pose;
    const sensors::CameraModel* camera = nullptr;
    if (req.sensor.empty()) {
        camera = &s.free_camera;
        camera_pose = req.pose.value_or(s.free_pose);
    } else {
        const sensors::Sensor& sensor = s.rig.sensor(req.sensor);
        if (!s.trajectory) fail("OutOfRange", "no route is set, so rig sensors have no pose");
        if (!s.trajectory->covers(req.t))
            fail("OutOfRange", "t = " + std::to_string(req.t) + " lies outside the trajectory [" + std::to_string(s.trajectory->start_time()) +
                                   ", " + std::to_string(s.trajectory->end_time()) + "]");
        if (sensor.kind() == sensors::SensorKind::lidar) {
            const scene::SceneSnapshot snap = snapshot_at(s, req.t);
            render::PointCloud c;
            try {
                c = render::render_lidar(snap, sensor.lidar(), sensor.extrinsic, *s.trajectory, req.t, s.traffic_seed, threads);
            } catch (const Error& e) {
                if (e.code() == "TrajectoryGap") fail("OutOfRange", e.what());
                throw;
            }
            out.content_type = "application/octet-stream";
            out.body = render::encode_cloud(c);
            return out;
        }
        camera = &sensor.camera();
        camera_pose = compose(s.trajectory->pose_at(req.t), sensor.extrinsic);
    }
    const scene::SceneSnapshot snap = snapshot_at(s, req.t);
    const render::RenderFrame f = render::render_camera(snap, *camera, camera_pose, threads);
    out.content_type = "image/png";
    if (req.channel == "depth") out.body = render::encode_depth_png(f);
    else if (req.channel == "rgb") out.body = render::encode_rgb_png(f);
    else fail("Invalid", "unknown preview channel '" + req.channel + "'");
    return out;
}

/// One interactive session. Edits serialize on a writer mutex; every edit
/// that succeeds publishes a new state with revision + 1, failed edits
/// publish nothing.
class Session {
  public:
    Session(std::string id, SessionState initial) : id_(std::move(id)), state_(std::make_shared<const SessionState>(std::move(initial))) {
        touch();
    }

    const std::string& id() const { return id_; }

    std::shared_ptr<const SessionState> state() const {
        std::lock_guard lk(publish_mu_);
        return state_;
    }

    /// Applies `edit` to a copy of the current state and publishes it.
    template <class F>
    std::shared_ptr<const SessionState> edit(F&& edit) {
        std::lock_guard writer(write_mu_);
        touch();
        SessionState next = *state();
        edit(next);
        next.revision += 1;
        auto published = std::make_shared<const SessionState>(std::move(next));
        std::lock_guard lk(publish_mu_);
        state_ = published;
        return published;
    }

    void touch() {
        std::lock_guard lk(publish_mu_);
        last_used_ = std::chrono::steady_clock::now();
    }
    std::chrono::steady_clock::time_point last_used() const {
        std::lock_guard lk(publish_mu_);
        return last_used_;
    }

  private:
    std::string id_;
    mutable std::mutex write_mu_;
    mutable std::mutex publish_mu_;
    std::shared_ptr<const SessionState> state_;
    std::chrono::steady_clock::time_point last_used_;
};

/// Recomputes route, trajectory and traffic from the edit inputs.
inline void rebuild(SessionState& s) {
    const hdmap::LaneGraph& g = *s.map;
    if (!s.start.empty()) {
        s.route = pipeline::plan_with_maneuvers(g, s.start, s.goal, s.maneuvers);
        s.trajectory = hdmap::generate_trajectory(g, *s.route, s.profile);
    } else {
        s.route.reset();
        s.trajectory.reset();
    }
    const auto opts = s.start.empty() ? traffic::SpawnOptions{} : traffic::ego_spawn_options(s.start, s.ego_length, s.profile.cruise_speed);
    s.world0 = {};
    s.world0.agents = traffic::spawn(g, traffic::density_preset(s.density, s.agent_count),
                                     pipeline::traffic_asset_list(*s.scene, {}), s.traffic_seed, s.traffic_params, opts);
}

} // namespace oasim::service
