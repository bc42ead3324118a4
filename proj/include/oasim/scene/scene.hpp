#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/math.hpp"
#include "oasim/scene/sdf.hpp"

namespace oasim::scene {

enum class SemanticClass : std::uint16_t { background = 0, car = 1, truck = 2, bus = 3, none = 255 };

inline std::string to_string(SemanticClass c) {
    switch (c) {
        case SemanticClass::background: return "background";
        case SemanticClass::car: return "vehicle.car";
        case SemanticClass::truck: return "vehicle.truck";
        case SemanticClass::bus: return "vehicle.bus";
        default: return "none";
    }
}

inline SemanticClass parse_vehicle_class(const std::string& s) {
    if (s == "vehicle.car") return SemanticClass::car;
    if (s == "vehicle.truck") return SemanticClass::truck;
    if (s == "vehicle.bus") return SemanticClass::bus;
    fail("Invalid", "unknown asset class '" + s + "'");
}

/// Insertable foreground model. Object frame: origin at the bottom center of
/// the bounding box, +x forward.
struct Asset {
    std::string id;
    SemanticClass cls = SemanticClass::car;
    SdfField shape;
    Vec3 size{4.5, 1.8, 1.5};  // length, width, height
    Vec3 albedo{0.7, 0.7, 0.7};

    Aabb bbox() const { return {{-size.x / 2, -size.y / 2, 0.0}, {size.x / 2, size.y / 2, size.z}}; }
    double length() const { return size.x; }
};

/// Containment slack allowed between an asset's shape and its bbox.
inline constexpr double kAssetBboxSlack = 0.01;

inline void validate_asset(const Asset& a) {
    if (a.id.empty()) fail("Invalid", "asset id must not be empty");
    if (!(a.size.x > 0 && a.size.y > 0 && a.size.z > 0)) fail("Invalid", "asset '" + a.id + "' bbox extents must be positive");
    if (a.size.x < a.size.y) fail("Invalid", "asset '" + a.id + "' bbox length must be >= width");
    const auto b = a.shape.surface_bounds();
    if (!b) fail("Invalid", "asset '" + a.id + "' shape is unbounded");
    if (!a.bbox().inflated(kAssetBboxSlack + 1e-12).contains(*b))
        fail("Invalid", "asset '" + a.id + "' shape exceeds its bbox by more than 1 cm");
    for (int i = 0; i < 3; ++i)
        if (!(a.albedo[i] >= 0.0 && a.albedo[i] <= 1.0)) fail("Invalid", "asset '" + a.id + "' albedo outside [0,1]");
}

using AssetLibrary = std::map<std::string, std::shared_ptr<const Asset>>;

/// Background albedo: a constant color, optionally replaced by height bands
/// (first band whose z_max is >= the hit height wins).
struct AlbedoMap {
    struct Band {
        double z_max;
        Vec3 rgb;
    };
    Vec3 constant{0.5, 0.5, 0.5};
    std::vector<Band> bands;

    Vec3 at(double z) const {
        for (const auto& b : bands)
            if (z <= b.z_max) return b.rgb;
        return constant;
    }
};

struct Placement {
    std::string asset_id;
    Pose pose;
};

struct Instance {
    int id = 0;
    std::shared_ptr<const Asset> asset;
    Pose pose;
    Pose inverse;
    bool cullable = false;
    Aabb cull_box;   // object frame
    Aabb world_box;  // world-axis box around the posed cull_box
};

struct Sample {
    double distance;
    int instance;
};

inline constexpr int kBackgroundId = 0;
inline constexpr int kNoHitId = 65535;

/// Immutable composed scene: background field plus posed foreground
/// instances with ids 1..n. All queries are pure.
class SceneSnapshot {
  public:
    SceneSnapshot() = default;

    const SdfField& background() const { return background_; }
    const AlbedoMap& background_albedo() const { return albedo_; }
    const std::vector<Instance>& instances() const { return instances_; }
    double lipschitz() const { return lipschitz_; }
    std::optional<double> surface_top() const { return top_; }

    /// Scene distance and owning instance (argmin, lowest id on ties).
    /// Instances whose inflated bbox is farther than the current best are
    /// skipped; this never changes the result.
    Sample query(const Vec3& p) const {
        Sample best{background_.eval(p), kBackgroundId};
        for (const auto& inst : instances_) {
            if (inst.cullable && detail::beyond(inst.world_box.distance_squared(p), best.distance)) continue;
            const Vec3 q = inst.inverse.apply(p);
            if (inst.cullable && detail::beyond(inst.cull_box.distance_squared(q), best.distance)) continue;
            const double d = inst.asset->shape.eval(q);
            if (d < best.distance) best = {d, inst.id};
        }
        return best;
    }

    double distance(const Vec3& p) const { return query(p).distance; }

    const Instance* instance(int id) const {
        if (id < 1 || id > static_cast<int>(instances_.size())) return nullptr;
        return &instances_[static_cast<std::size_t>(id - 1)];
    }

    /// Unit surface normal of the owning component at p, in world frame.
    Vec3 normal(const Vec3& p, int id) const {
        if (const auto* inst = instance(id))
            return normalized(inst->pose.apply_direction(inst->asset->shape.gradient(inst->inverse.apply(p))));
        return background_.gradient(p);
    }

    SemanticClass class_of(int id) const {
        if (id == kBackgroundId) return SemanticClass::background;
        if (const auto* inst = instance(id)) return inst->asset->cls;
        return SemanticClass::none;
    }

    Vec3 albedo_of(int id, const Vec3& p) const {
        if (const auto* inst = instance(id)) return inst->asset->albedo;
        return albedo_.at(p.z);
    }

  private:
    friend SceneSnapshot compose(SdfField, AlbedoMap, const AssetLibrary&, const std::vector<Placement>&);

    SdfField background_;
    AlbedoMap albedo_;
    std::vector<Instance> instances_;
    double lipschitz_ = 1.0;
    std::optional<double> top_;
};

/// Composes background and placed assets into a snapshot.
/// Throws Error("UnknownAsset") for unresolved asset ids.
inline SceneSnapshot compose(SdfField background, AlbedoMap albedo, const AssetLibrary& library,
                             const std::vector<Placement>& placements) {
    SceneSnapshot s;
    s.lipschitz_ = background.lipschitz();
    s.top_ = background.surface_top();
    s.background_ = std::move(background);
    s.albedo_ = std::move(albedo);
    s.instances_.reserve(placements.size());
    int next_id = 1;
    for (const auto& pl : placements) {
        const auto it = library.find(pl.asset_id);
        if (it == library.end() || !it->second) fail("UnknownAsset", "asset '" + pl.asset_id + "' is not in the library");
        const double qn = pl.pose.rotation.norm();
        if (!(std::abs(qn - 1.0) < 1e-6)) fail("Invalid", "instance rotation is not a unit quaternion");
        Instance inst;
        inst.id = next_id++;
        inst.asset = it->second;
        inst.pose = {pl.pose.translation, pl.pose.rotation.normalized()};
        inst.inverse = inst.pose.inverse();
        // Analytic shapes are exact distances, so their bbox is a valid lower bound.
        inst.cullable = !inst.asset->shape.is_grid();
        inst.cull_box = inst.asset->bbox().inflated(2.0 * kAssetBboxSlack);
        {
            const Aabb b = inst.cull_box;
            Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
            Vec3 hi = -lo;
            for (int c = 0; c < 8; ++c) {
                const Vec3 w = inst.pose.apply({(c & 1) ? b.hi.x : b.lo.x, (c & 2) ? b.hi.y : b.lo.y, (c & 4) ? b.hi.z : b.lo.z});
                lo = cwise_min(lo, w);
                hi = cwise_max(hi, w);
            }
            inst.world_box = Aabb{lo, hi}.inflated(1e-9);
        }
        s.lipschitz_ = std::max(s.lipschitz_, inst.asset->shape.lipschitz());
        if (s.top_) {
            // World-space top of the rotated bbox.
            const Aabb b = inst.cull_box;
            double top = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < 8; ++c) {
                const Vec3 corner{(c & 1) ? b.hi.x : b.lo.x, (c & 2) ? b.hi.y : b.lo.y, (c & 4) ? b.hi.z : b.lo.z};
                top = std::max(top, inst.pose.apply(corner).z);
            }
            s.top_ = inst.cullable ? std::max(*s.top_, top) : std::optional<double>{};
        }
        s.instances_.push_back(std::move(inst));
    }
    return s;
}

struct Hit {
    double t = 0.0;
    Vec3 point;
    Vec3 normal;
    int instance = kBackgroundId;
    SemanticClass cls = SemanticClass::background;

    bool operator==(const Hit&) const = default;
};

inline constexpr int kMaxTraceSteps = 512;

/// Sphere traces a unit-direction ray. Steps by max(d / L, eps / 4); a
/// sample with d < eps is a hit. The hit is then refined onto the zero
/// crossing: marching continues inside the eps band until the sign flips
/// (followed by 8 bisection iterations between the last two samples) or
/// the ray leaves the band, in which case the closest sample is reported.
inline std::optional<Hit> sphere_trace(const SceneSnapshot& scene, const Vec3& origin, const Vec3& dir,
                                       double t_max, double eps) {
    const double lip = scene.lipschitz();
    const double min_step = eps / 4.0;
    const auto top = scene.surface_top();
    int steps = 0;
    double t = 0.0, prev_t = 0.0;
    Sample s{};
    for (;;) {
        const Vec3 p = origin + dir * t;
        if (top && dir.z >= 0.0 && p.z > *top + eps) return std::nullopt;
        s = scene.query(p);
        if (s.distance < eps) break;
        if (steps >= kMaxTraceSteps) return std::nullopt;
        prev_t = t;
        t += std::max(s.distance / lip, min_step);
        ++steps;
        if (t > t_max) return std::nullopt;
    }

    double hit_t = t;
    Sample hit_s = s;
    if (s.distance <= 0.0) {
        if (t > 0.0) {
            double lo = prev_t, hi = t;
            Sample s_lo = scene.query(origin + dir * lo), s_hi = s;
            for (int i = 0; i < 8; ++i) {
                const double mid = 0.5 * (lo + hi);
                const Sample sm = scene.query(origin + dir * mid);
                if (sm.distance > 0.0) lo = mid, s_lo = sm;
                else hi = mid, s_hi = sm;
            }
            const bool take_lo = std::abs(s_lo.distance) < std::abs(s_hi.distance) && s_lo.distance < eps;
            hit_t = take_lo ? lo : hi;
            hit_s = take_lo ? s_lo : s_hi;
        }
    } else {
        double lo = t;
        Sample s_lo = s;
        while (steps < kMaxTraceSteps) {
            const double next = lo + std::max(s_lo.distance / lip, min_step);
            const Sample sn = scene.query(origin + dir * next);
            ++steps;
            if (sn.distance <= 0.0) {
                double hi = next;
                Sample s_hi = sn;
                for (int i = 0; i < 8; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    const Sample sm = scene.query(origin + dir * mid);
                    if (sm.distance > 0.0) lo = mid, s_lo = sm;
                    else hi = mid, s_hi = sm;
                }
                const bool take_lo = std::abs(s_lo.distance) < std::abs(s_hi.distance);
                hit_t = take_lo ? lo : hi;
                hit_s = take_lo ? s_lo : s_hi;
                break;
            }
            if (sn.distance >= eps) break;  // left the band without crossing
            if (sn.distance < hit_s.distance) hit_t = next, hit_s = sn;
            lo = next;
            s_lo = sn;
        }
    }

    Hit h;
    h.t = hit_t;
    h.point = origin + dir * hit_t;
    h.instance = hit_s.instance;
    h.normal = scene.normal(h.point, hit_s.instance);
    h.cls = scene.class_of(hit_s.instance);
    return h;
}

} // namespace oasim::scene
