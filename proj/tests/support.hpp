#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <set>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <unistd.h>

#include "oasim/hdmap/lane_graph.hpp"
#include "oasim/hdmap/routing.hpp"
#include "oasim/render/frame.hpp"
#include "oasim/render/render.hpp"
#include "oasim/scene/scene.hpp"
#include "oasim/sensors/camera.hpp"
#include "oasim/traffic/traffic.hpp"

/// Expects `stmt` to throw oasim::Error with the given code.
#define EXPECT_ERROR_CODE(stmt, expected)                                                   \
    do {                                                                                    \
        try {                                                                               \
            static_cast<void>(stmt);                                                        \
            ADD_FAILURE() << #stmt " did not throw";                                        \
        } catch (const ::oasim::Error& e__) {                                                \
            EXPECT_EQ(e__.code(), expected) << e__.what();                                  \
        }                                                                                   \
    } while (0)

namespace oasim::test {

namespace fs = std::filesystem;

inline fs::path fixture_dir() { return OASIM_FIXTURE_DIR; }

/// Fresh empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const fs::path p = fs::temp_directory_path() /
                       ("oasim-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

inline json lane_json(const std::string& id, std::vector<Vec3> pts, std::vector<std::string> succ = {},
                      std::optional<std::string> left = {}, std::optional<std::string> right = {}) {
    json c = json::array();
    for (const auto& p : pts) c.push_back(vec3_json(p));
    json l{{"id", id}, {"centerline", c}, {"successors", succ}};
    if (left) l["left"] = *left;
    if (right) l["right"] = *right;
    return l;
}

/// A (100 m) forks into B (100 m, straight) and C (120 m, detour); both
/// merge into D.
inline hdmap::LaneGraph diamond_map() {
    const double h = std::sqrt(60.0 * 60.0 - 50.0 * 50.0);
    json lanes = json::array({
        lane_json("A", {{0, 0, 0}, {100, 0, 0}}, {"B", "C"}),
        lane_json("B", {{100, 0, 0}, {200, 0, 0}}, {"D"}),
        lane_json("C", {{100, 0, 0}, {150, h, 0}, {200, 0, 0}}, {"D"}),
        lane_json("D", {{200, 0, 0}, {300, 0, 0}}),
    });
    return hdmap::parse_hdmap({{"lanes", lanes}});
}

/// Two parallel lanes (L1 right of L2) with one successor each (L3 right
/// of L4), every lane 100 m.
inline hdmap::LaneGraph parallel_map() {
    json lanes = json::array({
        lane_json("L1", {{0, 0, 0}, {100, 0, 0}}, {"L3"}, "L2"),
        lane_json("L2", {{0, 3.5, 0}, {100, 3.5, 0}}, {"L4"}, std::nullopt, "L1"),
        lane_json("L3", {{100, 0, 0}, {200, 0, 0}}, {}, "L4"),
        lane_json("L4", {{100, 3.5, 0}, {200, 3.5, 0}}, {}, std::nullopt, "L3"),
    });
    return hdmap::parse_hdmap({{"lanes", lanes}});
}

/// Minimum cost over all simple paths, by exhaustive DFS. Edge weights:
/// successor = target length; neighbor = 25 + target length.
inline std::optional<double> brute_force_cost(const hdmap::LaneGraph& g, const std::string& start, const std::string& goal) {
    std::optional<double> best;
    std::set<std::string> on_path{start};
    std::function<void(const std::string&, double)> dfs = [&](const std::string& at, double cost) {
        if (at == goal) {
            if (!best || cost < *best) best = cost;
            return;
        }
        const hdmap::Lane& l = g.lane(at);
        std::vector<std::pair<std::string, double>> edges;
        for (const auto& s : l.successors) edges.emplace_back(s, g.lane(s).length());
        if (l.left) edges.emplace_back(*l.left, 25.0 + g.lane(*l.left).length());
        if (l.right) edges.emplace_back(*l.right, 25.0 + g.lane(*l.right).length());
        for (const auto& [to, w] : edges) {
            if (on_path.count(to)) continue;
            on_path.insert(to);
            dfs(to, cost + w);
            on_path.erase(to);
        }
    };
    dfs(start, 0.0);
    return best;
}

/// Random topology on n loop-shaped lanes: every lane starts and ends at
/// the origin, so any successor relation is geometrically valid.
inline hdmap::LaneGraph random_graph(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(5.0, 80.0);
    std::bernoulli_distribution edge(0.25);
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("N" + std::to_string(i));
    std::vector<json> lanes;
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> succ;
        for (int j = 0; j < n; ++j)
            if (j != i && edge(rng)) succ.push_back(ids[j]);
        lanes.push_back(lane_json(ids[i], {{0, 0, 0}, {u(rng), u(rng) - 40.0, 0}, {0, 0, 0}}, succ));
    }
    // neighbor pairs (2k, 2k+1) with probability 1/2
    for (int i = 0; i + 1 < n; i += 2)
        if (edge(rng) || edge(rng)) {
            lanes[i]["left"] = ids[i + 1];
            lanes[i + 1]["right"] = ids[i];
        }
    return hdmap::parse_hdmap({{"lanes", lanes}});
}

/// Smallest bumper gap between consecutive vehicles sharing a lane.
inline double min_same_lane_gap(const traffic::World& w, const std::optional<traffic::EgoState>& ego = std::nullopt) {
    std::map<std::string, std::vector<std::pair<double, double>>> by_lane;
    for (const auto& a : w.agents) by_lane[a.lane()].emplace_back(a.s, a.length);
    if (ego) by_lane[ego->lane].emplace_back(ego->s, ego->length);
    double m = std::numeric_limits<double>::infinity();
    for (auto& [lane, v] : by_lane) {
        std::sort(v.begin(), v.end());
        for (std::size_t i = 1; i < v.size(); ++i) m = std::min(m, v[i].first - v[i - 1].first - 0.5 * (v[i].second + v[i - 1].second));
    }
    return m;
}

/// Ray-sphere intersection from the quadratic formula (unit dir).
inline std::optional<double> ray_sphere(const Vec3& o, const Vec3& d, const Vec3& c, double r) {
    const Vec3 oc = o - c;
    const double b = dot(oc, d), cc = dot(oc, oc) - r * r;
    const double disc = b * b - cc;
    if (disc < 0.0) return std::nullopt;
    const double t = -b - std::sqrt(disc);
    if (t < 0.0) return std::nullopt;
    return t;
}

/// Unculled reference for SceneSnapshot::query: every background part and
/// every instance, argmin with the lowest id on ties.
inline scene::Sample naive_query(const scene::SceneSnapshot& s, const Vec3& p) {
    double bg;
    const auto& st = s.background().storage();
    if (const auto* u = std::get_if<scene::PrimitiveUnion>(&st)) {
        bg = std::numeric_limits<double>::infinity();
        for (const auto& part : u->parts) bg = std::min(bg, scene::detail::eval_primitive(part, p));
    } else {
        bg = s.background().eval(p);
    }
    scene::Sample best{bg, scene::kBackgroundId};
    for (const auto& inst : s.instances()) {
        const double d = inst.asset->shape.eval(inst.inverse.apply(p));
        if (d < best.distance) best = {d, inst.id};
    }
    return best;
}

/// Straight-line transcription of the sphere-tracing contract over
/// naive_query (no culling).
inline std::optional<scene::Hit> naive_trace(const scene::SceneSnapshot& sc, const Vec3& o, const Vec3& d, double t_max,
                                             double eps) {
    const double lip = sc.lipschitz(), min_step = eps / 4.0;
    auto q = [&](double t) { return naive_query(sc, o + d * t); };
    const auto top = sc.surface_top();
    auto above = [&](double t) { return top && d.z >= 0.0 && o.z + d.z * t > *top + eps; };
    int steps = 0;
    double t = 0.0, prev = 0.0;
    if (above(t)) return std::nullopt;
    scene::Sample s = q(0.0);
    while (s.distance >= eps) {
        if (steps >= scene::kMaxTraceSteps) return std::nullopt;
        prev = t;
        t += std::max(s.distance / lip, min_step);
        ++steps;
        if (t > t_max || above(t)) return std::nullopt;
        s = q(t);
    }
    double ht = t;
    scene::Sample hs = s;
    auto bisect = [&](double lo, scene::Sample slo, double hi, scene::Sample shi, bool need_band) {
        for (int i = 0; i < 8; ++i) {
            const double mid = 0.5 * (lo + hi);
            const scene::Sample sm = q(mid);
            if (sm.distance > 0.0) lo = mid, slo = sm;
            else hi = mid, shi = sm;
        }
        const bool take_lo = std::abs(slo.distance) < std::abs(shi.distance) && (!need_band || slo.distance < eps);
        ht = take_lo ? lo : hi;
        hs = take_lo ? slo : shi;
    };
    if (s.distance <= 0.0) {
        if (t > 0.0) bisect(prev, q(prev), t, s, true);
    } else {
        double lo = t;
        scene::Sample slo = s;
        while (steps < scene::kMaxTraceSteps) {
            const double next = lo + std::max(slo.distance / lip, min_step);
            const scene::Sample sn = q(next);
            ++steps;
            if (sn.distance <= 0.0) {
                bisect(lo, slo, next, sn, false);
                break;
            }
            if (sn.distance >= eps) break;
            if (sn.distance < hs.distance) ht = next, hs = sn;
            lo = next;
            slo = sn;
        }
    }
    scene::Hit h;
    h.t = ht;
    h.point = o + d * ht;
    h.instance = hs.instance;
    h.normal = sc.normal(h.point, hs.instance);
    h.cls = sc.class_of(hs.instance);
    return h;
}

/// Single-threaded per-pixel reference renderer over naive_trace.
inline render::RenderFrame reference_render(const scene::SceneSnapshot& snap, const sensors::CameraModel& cam, const Pose& pose) {
    render::RenderFrame f(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            const Vec3 d = pose.apply_direction(sensors::optical_to_body(sensors::pixel_ray(cam, x + 0.5, y + 0.5)));
            const auto px = render::shade(snap, naive_trace(snap, pose.translation, d, render::kCameraMaxDistance, render::kCameraEps));
            const std::size_t i = f.index(x, y);
            f.rgb[i] = px.rgb;
            f.depth[i] = px.depth;
            f.normal[i] = px.normal;
            f.semantic[i] = px.semantic;
            f.instance[i] = px.instance;
        }
    return f;
}

/// Fixture-compatible rig small enough for quick exports: two 48x27
/// cameras and a coarse 8-beam LiDAR.
inline json small_rig_json() {
    return json::parse(R"({"sensors":[
        {"id":"front","kind":"camera","model":{"width":48,"height":27,"fx":25,"fy":25,"cx":24,"cy":13.5},
         "extrinsic":{"translation":[1.5,0,1.6]}},
        {"id":"front_tele","kind":"camera","model":{"width":48,"height":27,"fx":100,"fy":100,"cx":24,"cy":13.5},
         "extrinsic":{"translation":[1.5,0.3,1.6]}},
        {"id":"top","kind":"lidar","model":{"beams":8,"elevation_min_deg":-20,"elevation_max_deg":5,"azimuth_step_deg":2,
         "range_noise":0.01},"extrinsic":{"translation":[0,0,1.9]}}]})");
}

/// Camera looking along +x from `eye` (body frame = world frame rotated by yaw).
inline Pose camera_at(const Vec3& eye, double yaw = 0.0) { return Pose::from_xyz_yaw(eye, yaw); }

} // namespace oasim::test
