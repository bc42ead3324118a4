#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "oasim/error.hpp"

namespace oasim::traffic {

struct TrafficParams {
    double v0 = 15.0;      // desired speed, m/s
    double T = 1.5;        // time headway, s
    double s0 = 2.0;       // jam distance, m
    double a_max = 1.5;    // m/s^2
    double b = 2.0;        // comfortable deceleration, m/s^2
    double delta = 4.0;    // free-road exponent
    double dt = 0.05;      // s

    bool operator==(const TrafficParams&) const = default;
};

inline void validate_params(const TrafficParams& p) {
    if (!(p.v0 > 0 && p.T > 0 && p.s0 > 0 && p.a_max > 0 && p.b > 0 && p.delta > 0 && p.dt > 0))
        fail("Invalid", "traffic parameters must all be positive");
    if (p.dt > 0.1) fail("Invalid", "traffic dt must be <= 0.1 s");
}

inline constexpr double kFreeRoad = std::numeric_limits<double>::infinity();

/// Intelligent Driver Model acceleration. `gap` is the bumper-to-bumper
/// distance to the leader, or kFreeRoad. The desired gap is floored at s0
/// and the result at -3b.
inline double idm_accel(double v, double v_lead, double gap, const TrafficParams& p) {
    const double free_term = std::pow(v / p.v0, p.delta);
    double interaction = 0.0;
    if (std::isfinite(gap)) {
        const double desired = std::max(p.s0, p.s0 + v * p.T + v * (v - v_lead) / (2.0 * std::sqrt(p.a_max * p.b)));
        const double ratio = desired / gap;
        interaction = ratio * ratio;
    }
    return std::max(p.a_max * (1.0 - free_term - interaction), -3.0 * p.b);
}

} // namespace oasim::traffic
