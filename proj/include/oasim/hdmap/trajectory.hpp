#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/hdmap/lane_graph.hpp"
#include "oasim/hdmap/routing.hpp"
#include "oasim/math.hpp"

namespace oasim::hdmap {

struct MotionProfile {
    double cruise_speed = 10.0;          // m/s
    double accel = 2.0;                  // m/s^2, used for both ramps
    double dt = 0.1;                     // s
    double lane_change_distance = 30.0;  // m
};

inline void validate_profile(const MotionProfile& p) {
    if (!(p.cruise_speed > 0.0)) fail("ProfileInvalid", "cruise speed must be > 0");
    if (!(p.accel > 0.0)) fail("ProfileInvalid", "acceleration must be > 0");
    if (!(p.dt > 0.0 && p.dt <= 0.5)) fail("ProfileInvalid", "dt must lie in (0, 0.5]");
    if (!(p.lane_change_distance >= 10.0)) fail("ProfileInvalid", "lane-change distance must be >= 10 m");
}

/// Dense geometric path of a route: concatenated centerlines with
/// smoothstep lateral blends at lane changes. Each vertex remembers which
/// lane it belongs to.
struct RoutePath {
    std::vector<Vec3> points;
    std::vector<double> s;
    std::vector<std::size_t> lane;  // graph lane index
    std::vector<double> lane_s;

    double length() const { return s.empty() ? 0.0 : s.back(); }

    void push(const Vec3& p, std::size_t lane_idx, double ls) {
        s.push_back(points.empty() ? 0.0 : s.back() + norm(p - points.back()));
        points.push_back(p);
        lane.push_back(lane_idx);
        lane_s.push_back(ls);
    }

    std::size_t segment(double at) const {
        const auto it = std::upper_bound(s.begin(), s.end(), at);
        std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
        i = std::min(i, points.size() - 2);
        while (i > 0 && s[i + 1] <= s[i]) --i;
        return i;
    }

    Vec3 point_at(double at) const {
        at = std::clamp(at, 0.0, length());
        const std::size_t i = segment(at);
        const double len = s[i + 1] - s[i];
        return lerp(points[i], points[i + 1], len > 0.0 ? (at - s[i]) / len : 0.0);
    }

    double heading_at(double at) const {
        const std::size_t i = segment(std::clamp(at, 0.0, length()));
        const Vec3 d = points[i + 1] - points[i];
        return std::atan2(d.y, d.x);
    }

    /// Lane and lane arc length at path arc length `at`.
    std::pair<std::size_t, double> lane_at(double at) const {
        at = std::clamp(at, 0.0, length());
        const std::size_t i = segment(at);
        const double len = s[i + 1] - s[i];
        const double u = len > 0.0 ? (at - s[i]) / len : 0.0;
        if (lane[i] == lane[i + 1]) return {lane[i + 1], lane_s[i] + (lane_s[i + 1] - lane_s[i]) * u};
        return {lane[i + 1], std::max(0.0, lane_s[i + 1] - (s[i + 1] - at))};
    }
};

inline constexpr double kBlendSpacing = 0.25;

inline RoutePath build_route_path(const LaneGraph& g, const Route& route, double lane_change_distance) {
    if (route.steps.empty()) fail("Invalid", "route is empty");
    RoutePath path;
    std::size_t cur = g.index_of(route.steps.front().lane);
    double cur_s = 0.0;

    auto append_lane = [&](std::size_t li, double from, double to) {
        const Lane& lane = g.lanes()[li];
        const auto& pts = lane.centerline.points();
        const auto& cum = lane.centerline.cumulative();
        path.push(lane.centerline.point_at(from), li, from);
        for (std::size_t k = 0; k < pts.size(); ++k)
            if (cum[k] > from && cum[k] < to) path.push(pts[k], li, cum[k]);
        if (to > from) path.push(lane.centerline.point_at(to), li, to);
    };

    for (std::size_t i = 1; i < route.steps.size(); ++i) {
        const RouteStep& step = route.steps[i];
        const Lane& a = g.lanes()[cur];
        const std::size_t next = g.index_of(step.lane);
        if (!is_lane_change(step.mode)) {
            append_lane(cur, cur_s, a.length());
            cur = next;
            cur_s = 0.0;
            continue;
        }
        const Lane& b = g.lanes()[next];
        double begin = std::max(cur_s, std::min(step.transition_s, a.length() - lane_change_distance));
        double dist = std::min(lane_change_distance, a.length() - begin);
        if (dist <= 0.0) begin = a.length(), dist = 0.0;
        append_lane(cur, cur_s, begin);
        const int n = std::max(1, static_cast<int>(std::ceil(dist / kBlendSpacing)));
        for (int k = 1; k <= n && dist > 0.0; ++k) {
            const double u = static_cast<double>(k) / n;
            const double sa = begin + u * dist;
            const double sb = corresponding_s(a, b, sa);
            const Vec3 p = lerp(a.centerline.point_at(sa), b.centerline.point_at(sb), smoothstep(u));
            if (u < 0.5) path.push(p, cur, sa);
            else path.push(p, next, sb);
        }
        cur = next;
        cur_s = corresponding_s(a, b, begin + dist);
    }
    append_lane(cur, cur_s, g.lanes()[cur].length());
    if (path.points.size() < 2 || !(path.length() > 0.0)) fail("Invalid", "route path has zero length");
    return path;
}

struct TrajectorySample {
    double time = 0.0;
    Pose pose;
    double speed = 0.0;
    std::string lane;
    double lane_s = 0.0;

    bool operator==(const TrajectorySample&) const = default;
};

/// Uniformly time-sampled poses. Sample i is at time samples[0].time + i*dt.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    double dt = 0.1;

    double start_time() const { return samples.empty() ? 0.0 : samples.front().time; }
    double end_time() const { return samples.empty() ? 0.0 : samples.back().time; }
    bool covers(double t) const { return !samples.empty() && t >= start_time() - 1e-12 && t <= end_time() + 1e-12; }

    /// Pose at time t: linear translation, slerp rotation.
    /// Throws Error("TrajectoryGap") outside the sampled extent.
    Pose pose_at(double t) const {
        if (!covers(t)) fail("TrajectoryGap", "time " + std::to_string(t) + " is outside the trajectory");
        if (samples.size() == 1) return samples[0].pose;
        double f = std::clamp((t - start_time()) / dt, 0.0, static_cast<double>(samples.size() - 1));
        if (std::abs(f - std::round(f)) < 1e-9) f = std::round(f);  // sample times themselves are exact
        const std::size_t i = std::min(static_cast<std::size_t>(std::floor(f)), samples.size() - 2);
        const double u = f - static_cast<double>(i);
        if (u == 0.0) return samples[i].pose;
        return interpolate(samples[i].pose, samples[i + 1].pose, u);
    }

    /// Sample at or before t, clamped to the extent.
    const TrajectorySample& sample_before(double t) const {
        const double f = std::clamp((t - start_time()) / dt + 1e-9, 0.0, static_cast<double>(samples.size() - 1));
        return samples[static_cast<std::size_t>(std::floor(f))];
    }

    bool operator==(const Trajectory&) const = default;
};

/// Holds the final pose (at zero speed) until at least t_end.
inline Trajectory extend_hold(Trajectory tr, double t_end) {
    if (tr.samples.empty()) return tr;
    TrajectorySample last = tr.samples.back();
    last.speed = 0.0;
    std::size_t i = tr.samples.size();
    while (tr.samples.back().time < t_end) {
        last.time = tr.samples.front().time + static_cast<double>(i++) * tr.dt;
        tr.samples.push_back(last);
    }
    return tr;
}

/// A vehicle standing still at `pose` over [t_start, t_end].
inline Trajectory stationary_trajectory(const Pose& pose, double t_start, double t_end, double dt = 0.05) {
    Trajectory tr;
    tr.dt = dt;
    const auto n = static_cast<std::size_t>(std::ceil((t_end - t_start) / dt - 1e-9));
    for (std::size_t i = 0; i <= n; ++i) tr.samples.push_back({t_start + static_cast<double>(i) * dt, pose, 0.0, "", 0.0});
    return tr;
}

namespace detail {

inline double stop_path_s(const Route& route, double route_len, double path_len) {
    double stop = path_len;
    for (const auto& e : route.edits)
        if (e.kind == SpeedEdit::Kind::stop) stop = std::min(stop, route_len > 0 ? e.s / route_len * path_len : 0.0);
    return stop;
}

} // namespace detail

inline constexpr double kProfileStep = 0.01;

/// Samples a route at uniform dt. Speed follows a trapezoid: accelerate at
/// `accel` from rest, cruise at min(cruise, lane limit), decelerate to rest
/// at the route end (or at the first stop edit). The profile is solved on a
/// fine arc-length grid with exact constant-acceleration motion per cell.
inline Trajectory generate_trajectory(const LaneGraph& g, const Route& route, const MotionProfile& profile) {
    validate_profile(profile);
    if (!route_is_connected(g, route)) fail("Invalid", "route steps are not connected in the graph");
    const RoutePath path = build_route_path(g, route, profile.lane_change_distance);
    const double route_len = route_length(g, route);
    const double total = detail::stop_path_s(route, route_len, path.length());
    const double a = profile.accel;

    Trajectory tr;
    tr.dt = profile.dt;
    auto make_sample = [&](double t, double s, double v) {
        TrajectorySample smp;
        smp.time = t;
        const Vec3 p = path.point_at(s);
        smp.pose = Pose::from_xyz_yaw(p, path.heading_at(s));
        smp.speed = v;
        const auto [li, ls] = path.lane_at(s);
        smp.lane = g.lanes()[li].id;
        smp.lane_s = ls;
        return smp;
    };
    if (!(total > 0.0)) {
        tr.samples.push_back(make_sample(0.0, 0.0, 0.0));
        return tr;
    }

    // speed edits mapped from route arc length onto path arc length
    std::vector<std::pair<double, double>> speed_sets;
    for (const auto& e : route.edits)
        if (e.kind == SpeedEdit::Kind::speed_set) speed_sets.emplace_back(route_len > 0 ? e.s / route_len * path.length() : 0.0, e.speed);
    std::sort(speed_sets.begin(), speed_sets.end());

    const std::size_t cells = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(total / kProfileStep)));
    const double ds = total / static_cast<double>(cells);
    std::vector<double> v(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        const double s = static_cast<double>(i) * ds;
        double cruise = profile.cruise_speed;
        for (const auto& [at, speed] : speed_sets)
            if (s >= at) cruise = speed;
        v[i] = std::min(cruise, g.lanes()[path.lane_at(s).first].speed_limit);
    }
    v.front() = 0.0;
    v.back() = 0.0;
    for (std::size_t i = 0; i < cells; ++i) v[i + 1] = std::min(v[i + 1], std::sqrt(v[i] * v[i] + 2.0 * a * ds));
    for (std::size_t i = cells; i-- > 0;) v[i] = std::min(v[i], std::sqrt(v[i + 1] * v[i + 1] + 2.0 * a * ds));

    std::vector<double> t_node(cells + 1, 0.0);
    for (std::size_t i = 0; i < cells; ++i) t_node[i + 1] = t_node[i] + 2.0 * ds / (v[i] + v[i + 1]);
    const double duration = t_node.back();

    const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration / profile.dt)));
    tr.samples.reserve(n + 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * profile.dt;
        const auto it = std::upper_bound(t_node.begin(), t_node.end(), t);
        const std::size_t i = std::min(static_cast<std::size_t>(it - t_node.begin()) - 1, cells - 1);
        const double tau = t - t_node[i];
        const double acc = (v[i + 1] * v[i + 1] - v[i] * v[i]) / (2.0 * ds);
        const double s = std::min(static_cast<double>(i) * ds + v[i] * tau + 0.5 * acc * tau * tau, static_cast<double>(i + 1) * ds);
        const double speed = std::max(0.0, v[i] + acc * tau);
        tr.samples.push_back(make_sample(t, s, speed));
    }
    tr.samples.push_back(make_sample(static_cast<double>(n) * profile.dt, total, 0.0));
    return tr;
}

} // namespace oasim::hdmap
