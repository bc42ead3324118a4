#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/math.hpp"

namespace oasim::scene {

struct Aabb {
    Vec3 lo, hi;

    Aabb merged(const Aabb& o) const { return {cwise_min(lo, o.lo), cwise_max(hi, o.hi)}; }
    Aabb inflated(double r) const { return {lo - Vec3{r, r, r}, hi + Vec3{r, r, r}}; }
    bool contains(const Aabb& o) const {
        return o.lo.x >= lo.x && o.lo.y >= lo.y && o.lo.z >= lo.z &&
               o.hi.x <= hi.x && o.hi.y <= hi.y && o.hi.z <= hi.z;
    }
    /// Unsigned distance from p to the box, 0 inside.
    double distance(const Vec3& p) const { return std::sqrt(distance_squared(p)); }
    double distance_squared(const Vec3& p) const {
        const Vec3 d = cwise_max(cwise_max(lo - p, p - hi), Vec3{});
        return dot(d, d);
    }
};

namespace detail {

/// True when a lower bound with square `lb2` proves a distance exceeds `best`.
inline bool beyond(double lb2, double best) { return lb2 > 0.0 && (best < 0.0 || lb2 > best * best); }

/// Static bounding-box hierarchy over indexed boxes, for min-distance
/// queries that skip subtrees whose box already exceeds the best value.
class BoxTree {
  public:
    struct Item {
        std::size_t index;
        Aabb box;
    };

    BoxTree() = default;
    explicit BoxTree(std::vector<Item> items) : items_(std::move(items)) {
        if (!items_.empty()) build(0, items_.size());
    }

    bool empty() const { return items_.empty(); }

    /// Calls `eval(index)` for every item that can still beat `best` and
    /// folds the result with min. Visit order never changes the result.
    template <class F>
    double min_distance(const Vec3& p, double best, F&& eval) const {
        if (nodes_.empty()) return best;
        struct Entry {
            std::size_t node;
            double lb2;
        };
        Entry stack[64];
        std::size_t top = 0;
        stack[top++] = {0, nodes_[0].box.distance_squared(p)};
        while (top) {
            const Entry e = stack[--top];
            if (beyond(e.lb2, best)) continue;
            const Node& n = nodes_[e.node];
            if (n.count) {
                for (std::size_t i = n.first; i < n.first + n.count; ++i)
                    if (n.count == 1 || !beyond(items_[i].box.distance_squared(p), best)) best = std::min(best, eval(items_[i].index));
                continue;
            }
            const double dl = nodes_[n.left].box.distance_squared(p);
            const double dr = nodes_[n.right].box.distance_squared(p);
            // farther child below the nearer one, so the nearer tightens best first
            if (dl <= dr) {
                if (!beyond(dr, best)) stack[top++] = {n.right, dr};
                if (!beyond(dl, best)) stack[top++] = {n.left, dl};
            } else {
                if (!beyond(dl, best)) stack[top++] = {n.left, dl};
                if (!beyond(dr, best)) stack[top++] = {n.right, dr};
            }
        }
        return best;
    }

  private:
    struct Node {
        Aabb box;
        std::size_t left = 0, right = 0;
        std::size_t first = 0, count = 0;  // leaf when count > 0
    };

    std::size_t build(std::size_t first, std::size_t last) {
        const std::size_t id = nodes_.size();
        nodes_.push_back({});
        Aabb box = items_[first].box;
        for (std::size_t i = first + 1; i < last; ++i) box = box.merged(items_[i].box);
        nodes_[id].box = box;
        if (last - first <= 1) {
            nodes_[id].first = first;
            nodes_[id].count = last - first;
            return id;
        }
        // median split on the axis whose halves have the least total surface area
        const std::size_t mid = first + (last - first) / 2;
        auto order = [this, first, mid, last](int axis) {
            std::nth_element(items_.begin() + static_cast<std::ptrdiff_t>(first), items_.begin() + static_cast<std::ptrdiff_t>(mid),
                             items_.begin() + static_cast<std::ptrdiff_t>(last), [axis](const Item& a, const Item& b) {
                                 const double ca = a.box.lo[axis] + a.box.hi[axis], cb = b.box.lo[axis] + b.box.hi[axis];
                                 return ca < cb || (ca == cb && a.index < b.index);
                             });
        };
        auto area = [this](std::size_t a, std::size_t b) {
            Aabb m = items_[a].box;
            for (std::size_t i = a + 1; i < b; ++i) m = m.merged(items_[i].box);
            const Vec3 e = m.hi - m.lo;
            return e.x * e.y + e.y * e.z + e.z * e.x;
        };
        int best_axis = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int axis = 0; axis < 3; ++axis) {
            order(axis);
            const double cost = area(first, mid) + area(mid, last);
            if (cost < best_cost) best_cost = cost, best_axis = axis;
        }
        order(best_axis);
        const std::size_t l = build(first, mid);
        const std::size_t r = build(mid, last);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    std::vector<Item> items_;
    std::vector<Node> nodes_;
};

} // namespace detail

// Analytic primitives. All distances are exact Euclidean signed distances.

/// Half-space below the plane dot(normal, p) = offset (normal stored unit).
struct Plane {
    Vec3 normal{0, 0, 1};
    double offset = 0.0;
};

struct Sphere {
    Vec3 center;
    double radius = 1.0;
};

struct Box {
    Vec3 center;
    Vec3 half_extents{1, 1, 1};
};

/// Box with edges rounded by `radius`; `half_extents` are the outer extents.
struct RoundedBox {
    Vec3 center;
    Vec3 half_extents{1, 1, 1};
    double radius = 0.1;
};

struct Capsule {
    Vec3 a, b;
    double radius = 0.5;
};

using Primitive = std::variant<Plane, Sphere, Box, RoundedBox, Capsule>;

struct PrimitiveUnion {
    std::vector<Primitive> parts;
};

/// Regular grid of signed distances, x-fastest node order, evaluated by
/// trilinear interpolation.
struct SampledGrid {
    Vec3 origin;
    double cell = 1.0;
    std::array<int, 3> dims{2, 2, 2};
    std::vector<float> values;

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
    }
    double at(int i, int j, int k) const { return values[index(i, j, k)]; }
    Vec3 node(int i, int j, int k) const { return origin + Vec3{i * cell, j * cell, k * cell}; }
    Aabb domain() const { return {origin, node(dims[0] - 1, dims[1] - 1, dims[2] - 1)}; }
};

namespace detail {

inline double eval_primitive(const Plane& s, const Vec3& p) { return dot(s.normal, p) - s.offset; }

inline double eval_primitive(const Sphere& s, const Vec3& p) { return norm(p - s.center) - s.radius; }

inline double box_distance(const Vec3& local, const Vec3& half) {
    const Vec3 q = cwise_abs(local) - half;
    return norm(cwise_max(q, Vec3{})) + std::min(max_component(q), 0.0);
}

inline double eval_primitive(const Box& s, const Vec3& p) { return box_distance(p - s.center, s.half_extents); }

inline double eval_primitive(const RoundedBox& s, const Vec3& p) {
    const Vec3 inner = s.half_extents - Vec3{s.radius, s.radius, s.radius};
    return box_distance(p - s.center, inner) - s.radius;
}

inline Vec3 capsule_closest(const Capsule& s, const Vec3& p) {
    const Vec3 ba = s.b - s.a;
    const double len2 = dot(ba, ba);
    const double h = len2 > 0.0 ? std::clamp(dot(p - s.a, ba) / len2, 0.0, 1.0) : 0.0;
    return s.a + ba * h;
}

inline double eval_primitive(const Capsule& s, const Vec3& p) { return norm(p - capsule_closest(s, p)) - s.radius; }

inline double eval_primitive(const Primitive& prim, const Vec3& p) {
    return std::visit([&](const auto& s) { return eval_primitive(s, p); }, prim);
}

constexpr Vec3 kFallbackNormal{0, 0, 1};

inline Vec3 unit_or_fallback(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 1e-300) || !std::isfinite(n)) return kFallbackNormal;
    return v / n;
}

inline Vec3 box_gradient(const Vec3& local, const Vec3& half) {
    const Vec3 q = cwise_abs(local) - half;
    const Vec3 sgn{local.x < 0 ? -1.0 : 1.0, local.y < 0 ? -1.0 : 1.0, local.z < 0 ? -1.0 : 1.0};
    if (max_component(q) > 0.0) {
        const Vec3 outside = cwise_max(q, Vec3{});
        return unit_or_fallback({sgn.x * outside.x, sgn.y * outside.y, sgn.z * outside.z});
    }
    // Inside: the nearest face wins.
    if (q.x >= q.y && q.x >= q.z) return {sgn.x, 0, 0};
    if (q.y >= q.z) return {0, sgn.y, 0};
    return {0, 0, sgn.z};
}

inline Vec3 gradient_primitive(const Plane& s, const Vec3&) { return unit_or_fallback(s.normal); }
inline Vec3 gradient_primitive(const Sphere& s, const Vec3& p) { return unit_or_fallback(p - s.center); }
inline Vec3 gradient_primitive(const Box& s, const Vec3& p) { return box_gradient(p - s.center, s.half_extents); }
inline Vec3 gradient_primitive(const RoundedBox& s, const Vec3& p) {
    return box_gradient(p - s.center, s.half_extents - Vec3{s.radius, s.radius, s.radius});
}
inline Vec3 gradient_primitive(const Capsule& s, const Vec3& p) { return unit_or_fallback(p - capsule_closest(s, p)); }

inline Vec3 gradient_primitive(const Primitive& prim, const Vec3& p) {
    return std::visit([&](const auto& s) { return gradient_primitive(s, p); }, prim);
}

inline std::optional<Aabb> primitive_bounds(const Primitive& prim) {
    struct Visitor {
        std::optional<Aabb> operator()(const Plane&) const { return std::nullopt; }
        std::optional<Aabb> operator()(const Sphere& s) const {
            const Vec3 r{s.radius, s.radius, s.radius};
            return Aabb{s.center - r, s.center + r};
        }
        std::optional<Aabb> operator()(const Box& s) const {
            return Aabb{s.center - s.half_extents, s.center + s.half_extents};
        }
        std::optional<Aabb> operator()(const RoundedBox& s) const {
            return Aabb{s.center - s.half_extents, s.center + s.half_extents};
        }
        std::optional<Aabb> operator()(const Capsule& s) const {
            const Vec3 r{s.radius, s.radius, s.radius};
            return Aabb{cwise_min(s.a, s.b) - r, cwise_max(s.a, s.b) + r};
        }
    };
    return std::visit(Visitor{}, prim);
}

inline void validate_primitive(const Primitive& prim) {
    struct Visitor {
        void operator()(const Plane& s) const {
            if (!(std::abs(norm(s.normal) - 1.0) < 1e-9)) fail("Invalid", "plane normal must be unit length");
            if (!std::isfinite(s.offset)) fail("Invalid", "plane offset must be finite");
        }
        void operator()(const Sphere& s) const {
            if (!(s.radius > 0.0)) fail("Invalid", "sphere radius must be positive");
        }
        void operator()(const Box& s) const {
            if (!(s.half_extents.x > 0 && s.half_extents.y > 0 && s.half_extents.z > 0))
                fail("Invalid", "box half extents must be positive");
        }
        void operator()(const RoundedBox& s) const {
            const double m = std::min(s.half_extents.x, std::min(s.half_extents.y, s.half_extents.z));
            if (!(s.radius >= 0.0 && s.radius <= m)) fail("Invalid", "rounded box radius must lie in [0, min half extent]");
        }
        void operator()(const Capsule& s) const {
            if (!(s.radius > 0.0)) fail("Invalid", "capsule radius must be positive");
        }
    };
    std::visit(Visitor{}, prim);
}

inline double snap_to_node(double f) {
    const double r = std::round(f);
    return std::abs(f - r) < 1e-9 ? r : f;
}

/// Largest |v(n+e_axis) - v(n)| over all adjacent node pairs along `axis`.
inline double max_adjacent_difference(const SampledGrid& g, int axis) {
    double m = 0.0;
    const int ni = g.dims[0] - (axis == 0), nj = g.dims[1] - (axis == 1), nk = g.dims[2] - (axis == 2);
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < nj; ++j)
            for (int i = 0; i < ni; ++i) {
                const double a = g.at(i, j, k);
                const double b = g.at(i + (axis == 0), j + (axis == 1), k + (axis == 2));
                m = std::max(m, std::abs(b - a));
            }
    return m;
}

inline double eval_grid(const SampledGrid& g, const Vec3& p) {
    const Aabb box = g.domain();
    const Vec3 q = cwise_min(cwise_max(p, box.lo), box.hi);
    const double outside = norm(p - q);

    double f[3] = {(q.x - g.origin.x) / g.cell, (q.y - g.origin.y) / g.cell, (q.z - g.origin.z) / g.cell};
    int idx[3];
    double t[3];
    for (int a = 0; a < 3; ++a) {
        f[a] = snap_to_node(f[a]);
        const int base = std::clamp(static_cast<int>(std::floor(f[a])), 0, g.dims[a] - 2);
        idx[a] = base;
        t[a] = std::clamp(f[a] - base, 0.0, 1.0);
    }
    auto mix = [](double a, double b, double u) { return (1.0 - u) * a + u * b; };
    const int i = idx[0], j = idx[1], k = idx[2];
    const double c00 = mix(g.at(i, j, k), g.at(i + 1, j, k), t[0]);
    const double c10 = mix(g.at(i, j + 1, k), g.at(i + 1, j + 1, k), t[0]);
    const double c01 = mix(g.at(i, j, k + 1), g.at(i + 1, j, k + 1), t[0]);
    const double c11 = mix(g.at(i, j + 1, k + 1), g.at(i + 1, j + 1, k + 1), t[0]);
    const double c0 = mix(c00, c10, t[1]);
    const double c1 = mix(c01, c11, t[1]);
    return outside + mix(c0, c1, t[2]);
}

} // namespace detail

/// A signed distance field: an analytic primitive, a union of primitives,
/// or a sampled grid. Immutable after construction; carries a Lipschitz
/// bound its values satisfy.
class SdfField {
  public:
    using Storage = std::variant<Primitive, PrimitiveUnion, SampledGrid>;

    SdfField() : SdfField(Primitive{Plane{}}) {}

    SdfField(Primitive prim) : storage_(std::move(prim)) {
        detail::validate_primitive(std::get<Primitive>(storage_));
    }

    SdfField(PrimitiveUnion u) : storage_(std::move(u)) {
        const auto& parts = std::get<PrimitiveUnion>(storage_).parts;
        if (parts.empty()) fail("Invalid", "union must contain at least one primitive");
        for (const auto& p : parts) detail::validate_primitive(p);
        std::vector<detail::BoxTree::Item> bounded;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (const auto b = detail::primitive_bounds(parts[i])) bounded.push_back({i, b->inflated(kCullMargin)});
            else unbounded_.push_back(i);
        }
        bounded_ = detail::BoxTree(std::move(bounded));
    }

    /// For grids the bound is sqrt(sum_axis max(1, M_axis)^2), where M_axis
    /// is the max adjacent-node difference over the cell size along that
    /// axis. It covers both the trilinear interior and the out-of-domain
    /// extension.
    SdfField(SampledGrid g) {
        for (int a = 0; a < 3; ++a)
            if (g.dims[a] < 2) fail("Invalid", "grid dims must be >= 2 on every axis");
        if (!(g.cell > 0.0)) fail("Invalid", "grid cell size must be positive");
        const std::size_t n = static_cast<std::size_t>(g.dims[0]) * g.dims[1] * g.dims[2];
        if (g.values.size() != n)
            fail("Invalid", "grid value count " + std::to_string(g.values.size()) + " does not match dims (" + std::to_string(n) + ")");
        for (float v : g.values)
            if (!std::isfinite(v)) fail("Invalid", "grid contains non-finite values");
        double sum = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double m = std::max(1.0, detail::max_adjacent_difference(g, a) / g.cell);
            sum += m * m;
        }
        lipschitz_ = std::sqrt(sum);
        storage_ = std::move(g);
    }

    const Storage& storage() const { return storage_; }
    double lipschitz() const { return lipschitz_; }
    bool is_grid() const { return std::holds_alternative<SampledGrid>(storage_); }

    double eval(const Vec3& p) const {
        switch (storage_.index()) {
            case 0: return detail::eval_primitive(std::get<0>(storage_), p);
            case 1: {
                // Bounded parts whose box is farther than the best so far
                // cannot win the min; skipping them leaves the value unchanged.
                const auto& parts = std::get<1>(storage_).parts;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t i : unbounded_) best = std::min(best, detail::eval_primitive(parts[i], p));
                return bounded_.min_distance(p, best, [&](std::size_t i) { return detail::eval_primitive(parts[i], p); });
            }
            default: return detail::eval_grid(std::get<2>(storage_), p);
        }
    }

    /// Unit gradient; analytic for primitives, central differences for grids
    /// with step max(1e-4, cell/4). Falls back to +z where undefined.
    Vec3 gradient(const Vec3& p) const {
        switch (storage_.index()) {
            case 0: return detail::gradient_primitive(std::get<0>(storage_), p);
            case 1: {
                const auto& parts = std::get<1>(storage_).parts;
                std::size_t arg = 0;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < parts.size(); ++i) {
                    const double d = detail::eval_primitive(parts[i], p);
                    if (d < best) best = d, arg = i;
                }
                return detail::gradient_primitive(parts[arg], p);
            }
            default: {
                const auto& g = std::get<2>(storage_);
                const double h = grid_gradient_step();
                const auto& e = [&](const Vec3& q) { return detail::eval_grid(g, q); };
                const Vec3 d{e(p + Vec3{h, 0, 0}) - e(p - Vec3{h, 0, 0}),
                             e(p + Vec3{0, h, 0}) - e(p - Vec3{0, h, 0}),
                             e(p + Vec3{0, 0, h}) - e(p - Vec3{0, 0, h})};
                return detail::unit_or_fallback(d);
            }
        }
    }

    /// Finite-difference step used for grid gradients.
    double grid_gradient_step() const {
        const auto* g = std::get_if<SampledGrid>(&storage_);
        return g ? std::max(1e-4, g->cell / 4.0) : 0.0;
    }

    /// Box containing the zero level set, or nullopt when unbounded (planes).
    /// For grids this is the box of nodes whose value is within one cell of
    /// the surface or inside.
    std::optional<Aabb> surface_bounds() const {
        switch (storage_.index()) {
            case 0: return detail::primitive_bounds(std::get<0>(storage_));
            case 1: {
                std::optional<Aabb> acc;
                for (const auto& part : std::get<1>(storage_).parts) {
                    const auto b = detail::primitive_bounds(part);
                    if (!b) return std::nullopt;
                    acc = acc ? acc->merged(*b) : *b;
                }
                return acc;
            }
            default: {
                const auto& g = std::get<2>(storage_);
                std::optional<Aabb> acc;
                for (int k = 0; k < g.dims[2]; ++k)
                    for (int j = 0; j < g.dims[1]; ++j)
                        for (int i = 0; i < g.dims[0]; ++i)
                            if (g.at(i, j, k) <= g.cell) {
                                const Aabb cellbox{g.node(i, j, k) - Vec3{g.cell, g.cell, g.cell}, g.node(i, j, k) + Vec3{g.cell, g.cell, g.cell}};
                                acc = acc ? acc->merged(cellbox) : cellbox;
                            }
                return acc;
            }
        }
    }

    /// Upper bound on the z coordinate of any surface point, when the field
    /// is bounded above (bounded primitives and +z-facing ground planes).
    std::optional<double> surface_top() const {
        auto top_of = [](const Primitive& prim) -> std::optional<double> {
            if (const auto* pl = std::get_if<Plane>(&prim)) {
                if (pl->normal == Vec3{0, 0, 1}) return pl->offset;
                return std::nullopt;
            }
            return detail::primitive_bounds(prim)->hi.z;
        };
        switch (storage_.index()) {
            case 0: return top_of(std::get<0>(storage_));
            case 1: {
                std::optional<double> acc;
                for (const auto& part : std::get<1>(storage_).parts) {
                    const auto t = top_of(part);
                    if (!t) return std::nullopt;
                    acc = acc ? std::max(*acc, *t) : *t;
                }
                return acc;
            }
            default: return std::nullopt;
        }
    }

  private:
    static constexpr double kCullMargin = 1e-6;

    Storage storage_;
    double lipschitz_ = 1.0;
    std::vector<std::size_t> unbounded_;
    detail::BoxTree bounded_;
};

inline double eval_sdf(const SdfField& field, const Vec3& p) { return field.eval(p); }
inline Vec3 sdf_gradient(const SdfField& field, const Vec3& p) { return field.gradient(p); }

/// Samples `source` at every node of a grid with the given geometry.
inline SampledGrid sample_grid(const SdfField& source, const Vec3& origin, double cell, std::array<int, 3> dims) {
    SampledGrid g{origin, cell, dims, {}};
    g.values.resize(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) g.values[g.index(i, j, k)] = static_cast<float>(source.eval(g.node(i, j, k)));
    return g;
}

} // namespace oasim::scene
