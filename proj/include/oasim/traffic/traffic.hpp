#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/hdmap/lane_graph.hpp"
#include "oasim/hdmap/routing.hpp"
#include "oasim/hdmap/trajectory.hpp"
#include "oasim/random.hpp"
#include "oasim/scene/scene.hpp"
#include "oasim/traffic/idm.hpp"

namespace oasim::traffic {

struct Agent {
    int id = 0;
    std::string asset_id;
    double length = 4.5;   // bbox length of the asset, m
    hdmap::Route route;    // successor-only lane sequence
    std::size_t step = 0;  // index into route.steps
    double s = 0.0;        // arc length on the current lane
    double v = 0.0;

    const std::string& lane() const { return route.steps[step].lane; }
    bool operator==(const Agent&) const = default;
};

struct World {
    double time = 0.0;
    std::vector<Agent> agents;  // ascending id

    bool operator==(const World&) const = default;
};

struct DensityPreset {
    std::string name;
    int count = 0;
};

/// Built-in presets: ego-only 0, few 5, many 25. `count_override` replaces
/// the preset's default count.
inline DensityPreset density_preset(const std::string& name, std::optional<int> count_override = std::nullopt) {
    DensityPreset p{name, 0};
    if (name == "ego-only") p.count = 0;
    else if (name == "few") p.count = 5;
    else if (name == "many") p.count = 25;
    else fail("Invalid", "unknown density preset '" + name + "'");
    if (count_override) p.count = *count_override;
    if (p.count < 0) fail("Invalid", "agent count must be >= 0");
    return p;
}

/// Ego as seen by traffic: a lane position, length, and speed.
struct EgoState {
    std::string lane;
    double s = 0.0;
    double v = 0.0;
    double length = 4.5;
};

struct SpawnOptions {
    double route_min_length = 200.0;
    int max_rejections = 1000;
    std::vector<EgoState> reserved;  // positions (e.g. the ego start) to keep clear
    double reserved_headway = 0.0;   // extra clear distance ahead of each reserved position
};

/// Agents start from rest while the scripted ego does not react to them,
/// so the ego start keeps this many seconds of cruise travel clear ahead.
inline constexpr double kEgoClearTime = 6.0;

inline SpawnOptions ego_spawn_options(const std::string& lane, double ego_length, double cruise_speed) {
    SpawnOptions opts;
    opts.reserved.push_back({lane, 0.0, 0.0, ego_length});
    opts.reserved_headway = kEgoClearTime * cruise_speed;
    return opts;
}

namespace detail {

/// Shortest forward distance from (a, sa) to (b, sb) following successor
/// links, or +inf if farther than `limit`.
inline double forward_distance(const hdmap::LaneGraph& g, const std::string& a, double sa, const std::string& b, double sb,
                               double limit, int depth = 0) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (a == b && sb >= sa) return sb - sa;
    const hdmap::Lane& lane = g.lane(a);
    const double to_end = lane.length() - sa;
    if (to_end > limit || depth > 64) return inf;
    double best = inf;
    for (const auto& succ : lane.successors) best = std::min(best, to_end + forward_distance(g, succ, 0.0, b, sb, limit - to_end, depth + 1));
    return best;
}

inline hdmap::Route random_route(const hdmap::LaneGraph& g, const std::string& lane, double s, double min_length, SplitMix& rng) {
    hdmap::Route r;
    r.steps.push_back({lane, hdmap::EntryMode::start, 0.0});
    double acc = g.lane(lane).length() - s;
    std::string cur = lane;
    while (acc < min_length) {
        const auto& succ = g.lane(cur).successors;
        if (succ.empty()) break;
        cur = succ[rng.below(succ.size())];
        r.steps.push_back({cur, hdmap::EntryMode::successor, 0.0});
        acc += g.lane(cur).length();
    }
    r.cost = hdmap::route_cost(g, r);
    return r;
}

} // namespace detail

/// Places `preset.count` agents by seeded rejection sampling over lanes
/// (length-weighted) and arc lengths. Any two vehicles, including reserved
/// positions, end up at least s0 + the longer length apart along the
/// successor corridor; reserved positions also keep their headway clear
/// ahead. Throws Error("SpawnInfeasible") after too many
/// rejections.
inline std::vector<Agent> spawn(const hdmap::LaneGraph& g, const DensityPreset& preset,
                                const std::vector<std::shared_ptr<const scene::Asset>>& assets, std::uint64_t seed,
                                const TrafficParams& params, const SpawnOptions& opts = {}) {
    if (preset.count < 0) fail("Invalid", "agent count must be >= 0");
    std::vector<Agent> agents;
    if (preset.count == 0) return agents;
    if (assets.empty()) fail("Invalid", "no vehicle assets available for traffic");
    SplitMix rng(hash_key({seed, 0x7472616666696351ULL}));
    const double total = g.total_length();
    int rejections = 0;

    struct Occupant {
        std::string lane;
        double s, length;
        double headway = 0.0;  // extra clearance required ahead
    };
    std::vector<Occupant> occupied;
    for (const auto& r : opts.reserved) occupied.push_back({r.lane, r.s, r.length, opts.reserved_headway});

    while (static_cast<int>(agents.size()) < preset.count) {
        // length-weighted lane choice
        double pick = rng.uniform() * total;
        std::size_t li = 0;
        for (; li + 1 < g.lanes().size(); ++li) {
            if (pick < g.lanes()[li].length()) break;
            pick -= g.lanes()[li].length();
        }
        const hdmap::Lane& lane = g.lanes()[li];
        const double s = rng.uniform() * lane.length();
        const auto& asset = assets[rng.below(assets.size())];

        bool ok = true;
        for (const auto& o : occupied) {
            const double need = params.s0 + std::max(o.length, asset->length());
            const double behind = detail::forward_distance(g, lane.id, s, o.lane, o.s, need);
            const double ahead = detail::forward_distance(g, o.lane, o.s, lane.id, s, need + o.headway);
            if (behind < need || ahead < need + o.headway) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            if (++rejections >= opts.max_rejections)
                fail("SpawnInfeasible", "could not place " + std::to_string(preset.count) + " agents after " +
                                            std::to_string(opts.max_rejections) + " rejected attempts");
            continue;
        }
        Agent a;
        a.id = static_cast<int>(agents.size()) + 1;
        a.asset_id = asset->id;
        a.length = asset->length();
        a.route = detail::random_route(g, lane.id, s, opts.route_min_length, rng);
        a.s = s;
        a.v = 0.0;
        occupied.push_back({lane.id, s, a.length});
        agents.push_back(std::move(a));
    }
    return agents;
}

inline constexpr double kLeaderRange = 150.0;
inline constexpr double kMinGap = 1e-3;

struct Leader {
    double gap = kFreeRoad;  // bumper to bumper
    double v = 0.0;
};

/// Nearest vehicle ahead on the agent's route corridor within 150 m
/// (center distance), including the ego when given.
inline Leader find_leader(const hdmap::LaneGraph& g, const Agent& self, const std::vector<Agent>& agents,
                          const std::optional<EgoState>& ego) {
    struct Vehicle {
        const std::string* lane;
        double s, v, length;
        int id;
    };
    std::vector<Vehicle> others;
    others.reserve(agents.size() + 1);
    for (const auto& a : agents)
        if (a.id != self.id) others.push_back({&a.route.steps[a.step].lane, a.s, a.v, a.length, a.id});
    if (ego) others.push_back({&ego->lane, ego->s, ego->v, ego->length, 0});

    Leader best;
    double best_dist = std::numeric_limits<double>::infinity();
    const Vehicle* best_vehicle = nullptr;
    double offset = -self.s;
    for (std::size_t j = self.step; j < self.route.steps.size() && offset <= kLeaderRange; ++j) {
        const std::string& lane = self.route.steps[j].lane;
        for (const auto& o : others) {
            if (*o.lane != lane) continue;
            const double d = offset + o.s;
            const bool ahead = d > 0.0 || (d == 0.0 && j == self.step && o.id > self.id);
            if (!ahead || d > kLeaderRange) continue;
            if (d < best_dist) best_dist = d, best_vehicle = &o;
        }
        if (best_vehicle) break;  // later lanes are farther
        offset += g.lane(lane).length();
    }
    if (best_vehicle) {
        best.gap = std::max(kMinGap, best_dist - 0.5 * (self.length + best_vehicle->length));
        best.v = best_vehicle->v;
    }
    return best;
}

/// Ego lane position at time t, or nullopt without an ego trajectory.
inline std::optional<EgoState> ego_state_at(const hdmap::Trajectory* ego, double t, double ego_length) {
    if (!ego || ego->samples.empty()) return std::nullopt;
    const auto& smp = ego->sample_before(t);
    const double v = t > ego->end_time() ? 0.0 : smp.speed;
    return EgoState{smp.lane, smp.lane_s, v, ego_length};
}

/// Advances traffic by one dt. Accelerations are computed from the state at
/// the start of the step, then every agent integrates (semi-implicit
/// Euler). Agents past the end of their route despawn. The ego only
/// provides a leader and is never modified.
inline World step(const hdmap::LaneGraph& g, const World& world, const hdmap::Trajectory* ego, const TrafficParams& p,
                  double ego_length = 4.5) {
    const auto ego_state = ego_state_at(ego, world.time, ego_length);
    std::vector<double> accel(world.agents.size());
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
        const Agent& a = world.agents[i];
        const Leader lead = find_leader(g, a, world.agents, ego_state);
        accel[i] = idm_accel(a.v, lead.v, lead.gap, p);
    }
    World next;
    next.time = world.time + p.dt;
    next.agents.reserve(world.agents.size());
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
        Agent a = world.agents[i];
        a.v = std::max(0.0, a.v + accel[i] * p.dt);
        a.s += a.v * p.dt;
        bool alive = true;
        while (a.s > g.lane(a.lane()).length()) {
            if (a.step + 1 >= a.route.steps.size()) {
                alive = false;
                break;
            }
            a.s -= g.lane(a.lane()).length();
            ++a.step;
        }
        if (alive) next.agents.push_back(std::move(a));
    }
    return next;
}

/// Steps until world.time reaches t_end (within half a step).
inline World simulate_until(const hdmap::LaneGraph& g, World world, const hdmap::Trajectory* ego, const TrafficParams& p,
                            double t_end, double ego_length = 4.5) {
    const auto steps = static_cast<long long>(std::llround((t_end - world.time) / p.dt));
    for (long long k = 0; k < steps; ++k) world = step(g, world, ego, p, ego_length);
    return world;
}

/// World pose of an agent (bottom-center of its bbox on the centerline).
inline Pose agent_pose(const hdmap::LaneGraph& g, const Agent& a) {
    const hdmap::Lane& lane = g.lane(a.lane());
    return Pose::from_xyz_yaw(lane.centerline.point_at(a.s), lane.centerline.heading_at(a.s));
}

inline std::vector<scene::Placement> agent_placements(const hdmap::LaneGraph& g, const World& w) {
    std::vector<scene::Placement> out;
    out.reserve(w.agents.size());
    for (const auto& a : w.agents) out.push_back({a.asset_id, agent_pose(g, a)});
    return out;
}

inline json world_json(const World& w) {
    json agents = json::array();
    for (const auto& a : w.agents) {
        json lanes = json::array();
        for (const auto& s : a.route.steps) lanes.push_back(s.lane);
        agents.push_back({{"id", a.id}, {"asset", a.asset_id}, {"lane", a.lane()}, {"s", a.s}, {"v", a.v}, {"route", lanes}});
    }
    return {{"time", w.time}, {"agents", agents}};
}

} // namespace oasim::traffic
