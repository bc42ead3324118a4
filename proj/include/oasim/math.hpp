#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oasim {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    return n > 0.0 ? v / n : Vec3{};
}

constexpr Vec3 cwise_abs(const Vec3& v) { return {v.x < 0 ? -v.x : v.x, v.y < 0 ? -v.y : v.y, v.z < 0 ? -v.z : v.z}; }
constexpr Vec3 cwise_max(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
constexpr Vec3 cwise_min(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
constexpr double max_component(const Vec3& v) { return std::max(v.x, std::max(v.y, v.z)); }

inline Vec3 lerp(const Vec3& a, const Vec3& b, double u) { return a + (b - a) * u; }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

/// Unit quaternion, (w, x, y, z) order, Hamilton convention.
struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    constexpr bool operator==(const Quat&) const = default;

    static Quat from_axis_angle(const Vec3& axis, double angle) {
        const Vec3 a = oasim::normalized(axis);
        const double s = std::sin(0.5 * angle);
        return {std::cos(0.5 * angle), a.x * s, a.y * s, a.z * s};
    }
    static Quat from_yaw(double yaw) { return {std::cos(0.5 * yaw), 0.0, 0.0, std::sin(0.5 * yaw)}; }
    /// Intrinsic z-y-x (yaw, pitch, roll) composition.
    static Quat from_ypr(double yaw, double pitch, double roll) {
        return from_yaw(yaw) * from_axis_angle({0, 1, 0}, pitch) * from_axis_angle({1, 0, 0}, roll);
    }

    constexpr Quat operator*(const Quat& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }

    constexpr Quat conjugate() const { return {w, -x, -y, -z}; }

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Quat normalized() const {
        const double n = norm();
        if (!(n > 0.0) || !std::isfinite(n)) return {};
        return {w / n, x / n, y / n, z / n};
    }

    constexpr Vec3 rotate(const Vec3& v) const {
        // v' = v + 2 q_v x (q_v x v + w v)
        const Vec3 qv{x, y, z};
        const Vec3 t = cross(qv, v) * 2.0;
        return v + t * w + cross(qv, t);
    }

    double yaw() const { return std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z)); }
};

inline Quat slerp(Quat a, Quat b, double u) {
    double c = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
    if (c < 0.0) {
        b = {-b.w, -b.x, -b.y, -b.z};
        c = -c;
    }
    double ka, kb;
    if (c > 0.9995) {
        ka = 1.0 - u;
        kb = u;
    } else {
        const double theta = std::acos(c);
        const double s = std::sin(theta);
        ka = std::sin((1.0 - u) * theta) / s;
        kb = std::sin(u * theta) / s;
    }
    return Quat{ka * a.w + kb * b.w, ka * a.x + kb * b.x, ka * a.y + kb * b.y, ka * a.z + kb * b.z}.normalized();
}

/// Rigid transform taking points from a local frame into its parent frame.
/// World is right-handed z-up; vehicle and sensor body frames are +x
/// forward, +y left, +z up.
struct Pose {
    Vec3 translation;
    Quat rotation;

    constexpr bool operator==(const Pose&) const = default;

    static Pose from_xyz_yaw(const Vec3& t, double yaw) { return {t, Quat::from_yaw(yaw)}; }

    constexpr Vec3 apply(const Vec3& p) const { return rotation.rotate(p) + translation; }
    constexpr Vec3 apply_direction(const Vec3& d) const { return rotation.rotate(d); }

    Pose inverse() const {
        const Quat qi = rotation.conjugate();
        return {-qi.rotate(translation), qi};
    }

    double yaw() const { return rotation.yaw(); }
};

/// (a ∘ b)(p) = a(b(p)).
inline Pose compose(const Pose& a, const Pose& b) {
    return {a.rotation.rotate(b.translation) + a.translation, (a.rotation * b.rotation).normalized()};
}

inline Pose interpolate(const Pose& a, const Pose& b, double u) {
    return {lerp(a.translation, b.translation, u), slerp(a.rotation, b.rotation, u)};
}

inline double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

} // namespace oasim
