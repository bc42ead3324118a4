#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/json_util.hpp"
#include "oasim/math.hpp"

namespace oasim::hdmap {

/// Polyline parameterized by arc length.
class Polyline {
  public:
    Polyline() = default;
    explicit Polyline(std::vector<Vec3> pts) : points_(std::move(pts)) {
        cumulative_.reserve(points_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (i > 0) acc += norm(points_[i] - points_[i - 1]);
            cumulative_.push_back(acc);
        }
    }

    const std::vector<Vec3>& points() const { return points_; }
    const std::vector<double>& cumulative() const { return cumulative_; }
    double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

    /// Index i of the segment [i, i+1] containing s (positive-length
    /// segments only; s is clamped to the polyline).
    std::size_t segment(double s) const {
        if (points_.size() < 2) return 0;
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
        std::size_t i = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
        i = std::min(i, points_.size() - 2);
        while (i > 0 && cumulative_[i + 1] <= cumulative_[i]) --i;
        return i;
    }

    Vec3 point_at(double s) const {
        if (points_.empty()) return {};
        if (points_.size() == 1) return points_[0];
        s = std::clamp(s, 0.0, length());
        const std::size_t i = segment(s);
        const double seg = cumulative_[i + 1] - cumulative_[i];
        const double u = seg > 0.0 ? (s - cumulative_[i]) / seg : 0.0;
        return lerp(points_[i], points_[i + 1], u);
    }

    Vec3 tangent_at(double s) const {
        if (points_.size() < 2) return {1, 0, 0};
        const std::size_t i = segment(std::clamp(s, 0.0, length()));
        return normalized(points_[i + 1] - points_[i]);
    }

    double heading_at(double s) const {
        const Vec3 t = tangent_at(s);
        return std::atan2(t.y, t.x);
    }

  private:
    std::vector<Vec3> points_;
    std::vector<double> cumulative_;
};

struct Lane {
    std::string id;
    Polyline centerline;
    double width = 3.5;
    double speed_limit = 15.0;
    std::vector<std::string> successors;
    std::optional<std::string> left;
    std::optional<std::string> right;

    double length() const { return centerline.length(); }
};

/// Display-only road furniture: markings, signs, barriers.
struct Feature {
    std::string cls;
    std::vector<Vec3> polyline;
};

inline constexpr double kSuccessorGapTolerance = 0.1;

/// Validated lane-level HD map. Immutable after construction.
class LaneGraph {
  public:
    LaneGraph() = default;

    /// Validates every invariant; throws Error("MapInvalid") naming the
    /// first violation found.
    LaneGraph(std::vector<Lane> lanes, std::vector<Feature> features = {})
        : lanes_(std::move(lanes)), features_(std::move(features)) {
        if (lanes_.empty()) fail("MapInvalid", "map contains no lanes");
        for (std::size_t i = 0; i < lanes_.size(); ++i) {
            const Lane& l = lanes_[i];
            if (l.id.empty()) fail("MapInvalid", "lane with empty id");
            if (!index_.emplace(l.id, i).second) fail("MapInvalid", "duplicate lane id '" + l.id + "'");
        }
        for (const Lane& l : lanes_) {
            const auto& pts = l.centerline.points();
            if (pts.size() < 2) fail("MapInvalid", "lane '" + l.id + "' centerline needs at least 2 points");
            for (std::size_t k = 1; k < pts.size(); ++k)
                if (pts[k] == pts[k - 1]) fail("MapInvalid", "lane '" + l.id + "' has repeated consecutive centerline points");
            if (!(l.length() > 0.0)) fail("MapInvalid", "lane '" + l.id + "' has zero length");
            if (!(l.width > 0.0)) fail("MapInvalid", "lane '" + l.id + "' width must be positive");
            if (!(l.speed_limit > 0.0)) fail("MapInvalid", "lane '" + l.id + "' speed limit must be positive");
            for (const auto& s : l.successors)
                if (!index_.contains(s)) fail("MapInvalid", "dangling id: lane '" + l.id + "' successor '" + s + "' does not exist");
            if (l.left && !index_.contains(*l.left)) fail("MapInvalid", "dangling id: lane '" + l.id + "' left neighbor '" + *l.left + "' does not exist");
            if (l.right && !index_.contains(*l.right)) fail("MapInvalid", "dangling id: lane '" + l.id + "' right neighbor '" + *l.right + "' does not exist");
        }
        for (const Lane& l : lanes_) {
            if (l.left) {
                const Lane& n = lane(*l.left);
                if (n.right != l.id) fail("MapInvalid", "asymmetric neighbor: '" + l.id + "'.left = '" + n.id + "' but '" + n.id + "'.right != '" + l.id + "'");
            }
            if (l.right) {
                const Lane& n = lane(*l.right);
                if (n.left != l.id) fail("MapInvalid", "asymmetric neighbor: '" + l.id + "'.right = '" + n.id + "' but '" + n.id + "'.left != '" + l.id + "'");
            }
            for (const auto& s : l.successors) {
                const double gap = norm(lane(s).centerline.points().front() - l.centerline.points().back());
                if (gap > kSuccessorGapTolerance)
                    fail("MapInvalid", "gap of " + std::to_string(gap) + " m between lane '" + l.id + "' and successor '" + s + "'");
            }
        }
    }

    const std::vector<Lane>& lanes() const { return lanes_; }
    const std::vector<Feature>& features() const { return features_; }

    bool contains(const std::string& id) const { return index_.contains(id); }

    std::size_t index_of(const std::string& id) const {
        const auto it = index_.find(id);
        if (it == index_.end()) fail("UnknownLane", "lane '" + id + "' does not exist");
        return it->second;
    }

    const Lane& lane(const std::string& id) const { return lanes_[index_of(id)]; }

    std::size_t successor_edge_count() const {
        std::size_t n = 0;
        for (const auto& l : lanes_) n += l.successors.size();
        return n;
    }

    /// Number of unordered left/right neighbor pairs.
    std::size_t neighbor_pair_count() const {
        std::size_t n = 0;
        for (const auto& l : lanes_) n += l.left ? 1 : 0;
        return n;
    }

    double total_length() const {
        double acc = 0.0;
        for (const auto& l : lanes_) acc += l.length();
        return acc;
    }

    /// Mean of all centerline vertices.
    Vec3 centroid() const {
        Vec3 acc;
        std::size_t n = 0;
        for (const auto& l : lanes_)
            for (const auto& p : l.centerline.points()) acc += p, ++n;
        return n ? acc / static_cast<double>(n) : acc;
    }

  private:
    std::vector<Lane> lanes_;
    std::vector<Feature> features_;
    std::map<std::string, std::size_t> index_;
};

namespace detail {

inline std::vector<Vec3> parse_polyline(const json& j) {
    if (!j.is_array()) fail("MapFormat", "polyline must be an array of [x,y,z]");
    std::vector<Vec3> pts;
    pts.reserve(j.size());
    for (const auto& p : j) pts.push_back(to_vec3(p, "MapFormat"));
    return pts;
}

inline std::optional<std::string> optional_id(const json& l, const char* key) {
    if (!l.contains(key) || l.at(key).is_null()) return std::nullopt;
    if (!l.at(key).is_string()) fail("MapFormat", std::string("lane field '") + key + "' must be a string or null");
    return l.at(key).get<std::string>();
}

} // namespace detail

inline LaneGraph parse_hdmap(const json& doc) {
    if (!doc.is_object()) fail("MapFormat", "map document must be a JSON object");
    const json& lanes_j = member(doc, "lanes", "MapFormat");
    if (!lanes_j.is_array()) fail("MapFormat", "'lanes' must be an array");
    std::vector<Lane> lanes;
    for (const auto& l : lanes_j) {
        Lane lane;
        lane.id = get_string(l, "id", "MapFormat");
        lane.centerline = Polyline(detail::parse_polyline(member(l, "centerline", "MapFormat")));
        lane.width = get_number_or(l, "width", 3.5, "MapFormat");
        lane.speed_limit = get_number_or(l, "speed_limit", 15.0, "MapFormat");
        if (l.contains("successors")) {
            if (!l.at("successors").is_array()) fail("MapFormat", "'successors' must be an array");
            for (const auto& s : l.at("successors")) {
                if (!s.is_string()) fail("MapFormat", "successor ids must be strings");
                lane.successors.push_back(s.get<std::string>());
            }
        }
        lane.left = detail::optional_id(l, "left");
        lane.right = detail::optional_id(l, "right");
        lanes.push_back(std::move(lane));
    }
    std::vector<Feature> features;
    if (doc.contains("features")) {
        for (const auto& f : doc.at("features"))
            features.push_back({get_string(f, "class", "MapFormat"), detail::parse_polyline(member(f, "polyline", "MapFormat"))});
    }
    return LaneGraph(std::move(lanes), std::move(features));
}

/// Parses and validates map.json text. Errors: MapFormat, MapInvalid.
inline LaneGraph load_hdmap(const std::string& text) { return parse_hdmap(parse_json_text(text, "map", "MapFormat")); }

inline LaneGraph load_hdmap_file(const std::filesystem::path& path) {
    return parse_hdmap(parse_json_text(read_text_file(path), path.string(), "MapFormat"));
}

inline json hdmap_json(const LaneGraph& g) {
    json lanes = json::array();
    for (const auto& l : g.lanes()) {
        json pts = json::array();
        for (const auto& p : l.centerline.points()) pts.push_back(vec3_json(p));
        lanes.push_back({{"id", l.id},
                         {"centerline", pts},
                         {"width", l.width},
                         {"speed_limit", l.speed_limit},
                         {"successors", l.successors},
                         {"left", l.left ? json(*l.left) : json(nullptr)},
                         {"right", l.right ? json(*l.right) : json(nullptr)}});
    }
    json features = json::array();
    for (const auto& f : g.features()) {
        json pts = json::array();
        for (const auto& p : f.polyline) pts.push_back(vec3_json(p));
        features.push_back({{"class", f.cls}, {"polyline", pts}});
    }
    return {{"lanes", lanes}, {"features", features}};
}

} // namespace oasim::hdmap
