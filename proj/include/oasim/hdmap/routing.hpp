#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/hdmap/lane_graph.hpp"

namespace oasim::hdmap {

enum class EntryMode { start, successor, lane_change_left, lane_change_right };

inline std::string to_string(EntryMode m) {
    switch (m) {
        case EntryMode::start: return "start";
        case EntryMode::successor: return "successor";
        case EntryMode::lane_change_left: return "lane-change-left";
        default: return "lane-change-right";
    }
}

inline EntryMode parse_entry_mode(const std::string& s) {
    if (s == "start") return EntryMode::start;
    if (s == "successor") return EntryMode::successor;
    if (s == "lane-change-left") return EntryMode::lane_change_left;
    if (s == "lane-change-right") return EntryMode::lane_change_right;
    fail("Format", "unknown entry mode '" + s + "'");
}

inline bool is_lane_change(EntryMode m) { return m == EntryMode::lane_change_left || m == EntryMode::lane_change_right; }

struct RouteStep {
    std::string lane;
    EntryMode mode = EntryMode::start;
    /// Lane changes only: arc length on the previous step's lane where the
    /// change begins. Planned changes begin as early as possible (0).
    double transition_s = 0.0;

    bool operator==(const RouteStep&) const = default;
};

/// Speed edits ride along with the route and only affect its profile.
struct SpeedEdit {
    enum class Kind { speed_set, stop };
    Kind kind = Kind::speed_set;
    double s = 0.0;      // route arc length where the edit takes effect
    double speed = 0.0;  // speed_set only

    bool operator==(const SpeedEdit&) const = default;
};

struct Route {
    std::vector<RouteStep> steps;
    double cost = 0.0;
    std::vector<SpeedEdit> edits;

    const std::string& start() const { return steps.front().lane; }
    const std::string& goal() const { return steps.back().lane; }
    bool operator==(const Route&) const = default;
};

inline constexpr double kLaneChangePenalty = 25.0;

/// Position on a neighbor lane matching arc length `s_from` on `from`
/// (same fraction of the lane length).
inline double corresponding_s(const Lane& from, const Lane& to, double s_from) {
    return std::clamp(s_from / from.length(), 0.0, 1.0) * to.length();
}

/// The stretch of one route step's lane that the route actually drives.
struct LaneInterval {
    std::size_t step;
    double from, to;        // lane arc length
    double route_from;      // route arc length at `from`

    double route_to() const { return route_from + (to - from); }
};

/// Lane-interval accounting of a route. The route's arc length is the sum
/// of driven lane stretches; lane-change stretches count on the source lane
/// up to the transition point and on the target lane from the matching point.
inline std::vector<LaneInterval> route_intervals(const LaneGraph& g, const Route& r) {
    std::vector<LaneInterval> out;
    double entry = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        const Lane& lane = g.lane(r.steps[i].lane);
        double to = lane.length();
        double next_entry = 0.0;
        if (i + 1 < r.steps.size() && is_lane_change(r.steps[i + 1].mode)) {
            to = std::clamp(r.steps[i + 1].transition_s, entry, lane.length());
            next_entry = corresponding_s(lane, g.lane(r.steps[i + 1].lane), to);
        }
        out.push_back({i, entry, to, acc});
        acc += to - entry;
        entry = next_entry;
    }
    return out;
}

inline double route_length(const LaneGraph& g, const Route& r) {
    const auto iv = route_intervals(g, r);
    return iv.empty() ? 0.0 : iv.back().route_to();
}

/// Route cost: successor edges cost the target lane length; lane changes
/// cost the fixed penalty plus the target lane length remaining after entry.
inline double route_cost(const LaneGraph& g, const Route& r) {
    const auto iv = route_intervals(g, r);
    double cost = 0.0;
    for (std::size_t i = 1; i < r.steps.size(); ++i) {
        const Lane& lane = g.lane(r.steps[i].lane);
        if (is_lane_change(r.steps[i].mode)) cost += kLaneChangePenalty + (lane.length() - iv[i].from);
        else cost += lane.length();
    }
    return cost;
}

/// Checks that consecutive steps are joined by their stated relation.
inline bool route_is_connected(const LaneGraph& g, const Route& r) {
    if (r.steps.empty() || r.steps.front().mode != EntryMode::start) return false;
    for (std::size_t i = 1; i < r.steps.size(); ++i) {
        if (!g.contains(r.steps[i].lane) || !g.contains(r.steps[i - 1].lane)) return false;
        const Lane& prev = g.lane(r.steps[i - 1].lane);
        const std::string& id = r.steps[i].lane;
        switch (r.steps[i].mode) {
            case EntryMode::successor:
                if (std::find(prev.successors.begin(), prev.successors.end(), id) == prev.successors.end()) return false;
                break;
            case EntryMode::lane_change_left:
                if (prev.left != id) return false;
                break;
            case EntryMode::lane_change_right:
                if (prev.right != id) return false;
                break;
            default: return false;
        }
    }
    return true;
}

/// Uniform-cost search from start to goal. Ties resolve deterministically:
/// the frontier is ordered by (cost, lane id) and relaxations are strict.
/// Errors: UnknownLane, NoRoute.
inline Route plan_route(const LaneGraph& g, const std::string& start, const std::string& goal) {
    const std::size_t s = g.index_of(start);
    const std::size_t t = g.index_of(goal);
    const auto& lanes = g.lanes();
    constexpr double inf = std::numeric_limits<double>::infinity();

    struct Pred {
        std::size_t from;
        EntryMode mode;
    };
    std::vector<double> dist(lanes.size(), inf);
    std::vector<std::optional<Pred>> pred(lanes.size());
    std::vector<bool> done(lanes.size(), false);

    using Entry = std::tuple<double, std::string, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    dist[s] = 0.0;
    frontier.emplace(0.0, lanes[s].id, s);

    while (!frontier.empty()) {
        const auto [d, id, u] = frontier.top();
        frontier.pop();
        if (done[u]) continue;
        done[u] = true;
        if (u == t) break;
        auto relax = [&](const std::string& to_id, double w, EntryMode mode) {
            const std::size_t v = g.index_of(to_id);
            if (done[v]) return;
            if (d + w < dist[v]) {
                dist[v] = d + w;
                pred[v] = Pred{u, mode};
                frontier.emplace(dist[v], lanes[v].id, v);
            }
        };
        const Lane& lane = lanes[u];
        for (const auto& succ : lane.successors) relax(succ, g.lane(succ).length(), EntryMode::successor);
        if (lane.left) relax(*lane.left, kLaneChangePenalty + g.lane(*lane.left).length(), EntryMode::lane_change_left);
        if (lane.right) relax(*lane.right, kLaneChangePenalty + g.lane(*lane.right).length(), EntryMode::lane_change_right);
    }

    if (!done[t]) fail("NoRoute", "lane '" + goal + "' is unreachable from '" + start + "'");

    Route r;
    for (std::size_t v = t;;) {
        if (v == s && !pred[v]) {
            r.steps.push_back({lanes[v].id, EntryMode::start, 0.0});
            break;
        }
        r.steps.push_back({lanes[v].id, pred[v]->mode, 0.0});
        v = pred[v]->from;
    }
    std::reverse(r.steps.begin(), r.steps.end());
    r.cost = dist[t];
    return r;
}

struct Maneuver {
    enum class Kind { lane_change_left, lane_change_right, turn_select, speed_set, stop };
    Kind kind = Kind::stop;
    double s = 0.0;            // trigger, route arc length
    std::string target;        // turn_select: chosen successor id
    double speed = 0.0;        // speed_set

    bool operator==(const Maneuver&) const = default;
};

inline Maneuver::Kind parse_maneuver_kind(const std::string& s) {
    if (s == "lane-change-left") return Maneuver::Kind::lane_change_left;
    if (s == "lane-change-right") return Maneuver::Kind::lane_change_right;
    if (s == "turn-select") return Maneuver::Kind::turn_select;
    if (s == "speed-set") return Maneuver::Kind::speed_set;
    if (s == "stop") return Maneuver::Kind::stop;
    fail("Invalid", "unknown maneuver kind '" + s + "'");
}

inline std::string to_string(Maneuver::Kind k) {
    switch (k) {
        case Maneuver::Kind::lane_change_left: return "lane-change-left";
        case Maneuver::Kind::lane_change_right: return "lane-change-right";
        case Maneuver::Kind::turn_select: return "turn-select";
        case Maneuver::Kind::speed_set: return "speed-set";
        default: return "stop";
    }
}

namespace detail {

/// Step whose driven interval holds route arc length s: the first
/// positive-length interval with s <= its end.
inline std::size_t step_containing(const std::vector<LaneInterval>& iv, double s) {
    for (const auto& i : iv)
        if (i.to > i.from && s <= i.route_to()) return i.step;
    return iv.back().step;
}

inline Route join_suffix(const LaneGraph& g, std::vector<RouteStep> prefix, const Route& suffix, std::vector<SpeedEdit> edits) {
    Route r;
    r.steps = std::move(prefix);
    r.steps.insert(r.steps.end(), suffix.steps.begin() + 1, suffix.steps.end());
    r.edits = std::move(edits);
    r.cost = route_cost(g, r);
    return r;
}

} // namespace detail

/// Applies a keyboard-style edit. Lane changes and turn selections replace
/// the route from the edit point on and re-plan the rest to the original
/// goal; speed edits only annotate the route.
/// Errors: Invalid (trigger outside route), NoNeighbor, NotASuccessor, NoRoute.
inline Route apply_maneuver(const LaneGraph& g, const Route& route, const Maneuver& m) {
    if (route.steps.empty()) fail("Invalid", "route is empty");
    const auto iv = route_intervals(g, route);
    const double length = iv.back().route_to();
    if (!(m.s >= 0.0 && m.s <= length + 1e-9))
        fail("Invalid", "maneuver trigger s=" + std::to_string(m.s) + " outside route extent [0, " + std::to_string(length) + "]");

    switch (m.kind) {
        case Maneuver::Kind::speed_set:
        case Maneuver::Kind::stop: {
            if (m.kind == Maneuver::Kind::speed_set && !(m.speed > 0.0)) fail("Invalid", "speed-set requires a positive speed");
            Route r = route;
            const SpeedEdit e{m.kind == Maneuver::Kind::stop ? SpeedEdit::Kind::stop : SpeedEdit::Kind::speed_set, m.s,
                              m.kind == Maneuver::Kind::stop ? 0.0 : m.speed};
            if (std::find(r.edits.begin(), r.edits.end(), e) == r.edits.end()) r.edits.push_back(e);
            return r;
        }
        case Maneuver::Kind::lane_change_left:
        case Maneuver::Kind::lane_change_right: {
            const bool left = m.kind == Maneuver::Kind::lane_change_left;
            const std::size_t k = detail::step_containing(iv, m.s);
            const Lane& lane = g.lane(route.steps[k].lane);
            const auto& neighbor = left ? lane.left : lane.right;
            if (!neighbor) fail("NoNeighbor", "lane '" + lane.id + "' has no " + (left ? "left" : "right") + " neighbor");
            const double local_s = std::clamp(iv[k].from + (m.s - iv[k].route_from), iv[k].from, lane.length());
            std::vector<RouteStep> prefix(route.steps.begin(), route.steps.begin() + static_cast<std::ptrdiff_t>(k) + 1);
            prefix.push_back({*neighbor, left ? EntryMode::lane_change_left : EntryMode::lane_change_right, local_s});
            const Route suffix = plan_route(g, *neighbor, route.goal());
            return detail::join_suffix(g, std::move(prefix), suffix, route.edits);
        }
        case Maneuver::Kind::turn_select: {
            const std::size_t k = detail::step_containing(iv, m.s);
            std::size_t fork = k;
            for (std::size_t j = k; j < route.steps.size(); ++j)
                if (g.lane(route.steps[j].lane).successors.size() >= 2) {
                    fork = j;
                    break;
                }
            const Lane& lane = g.lane(route.steps[fork].lane);
            if (std::find(lane.successors.begin(), lane.successors.end(), m.target) == lane.successors.end())
                fail("NotASuccessor", "'" + m.target + "' is not a successor of lane '" + lane.id + "'");
            std::vector<RouteStep> prefix(route.steps.begin(), route.steps.begin() + static_cast<std::ptrdiff_t>(fork) + 1);
            prefix.push_back({m.target, EntryMode::successor, 0.0});
            const Route suffix = plan_route(g, m.target, route.goal());
            return detail::join_suffix(g, std::move(prefix), suffix, route.edits);
        }
    }
    fail("Invalid", "unhandled maneuver");
}

inline json route_json(const Route& r) {
    json steps = json::array();
    for (const auto& s : r.steps) {
        json j{{"lane", s.lane}, {"mode", to_string(s.mode)}};
        if (is_lane_change(s.mode)) j["transition_s"] = s.transition_s;
        steps.push_back(j);
    }
    json edits = json::array();
    for (const auto& e : r.edits)
        edits.push_back({{"kind", e.kind == SpeedEdit::Kind::stop ? "stop" : "speed-set"}, {"s", e.s}, {"speed", e.speed}});
    return {{"steps", steps}, {"cost", r.cost}, {"edits", edits}};
}

} // namespace oasim::hdmap
