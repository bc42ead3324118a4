#pragma once

#include <memory>
#include <string>
#include <vector>

#include "oasim/json_util.hpp"
#include "oasim/math.hpp"
#include "oasim/scene/scene.hpp"

namespace oasim::render {

/// A posed vehicle in the world, as handed to annotation.
struct Actor {
    int id = 0;      // scene instance id
    int track = -1;  // traffic agent id, -1 for static instances
    std::shared_ptr<const scene::Asset> asset;
    Pose pose;  // bottom-center of bbox
    double speed = 0.0;
    bool is_ego = false;
};

struct BoxAnnotation {
    int id = 0;
    int track = -1;
    scene::SemanticClass cls = scene::SemanticClass::car;
    Vec3 center;  // ego frame
    Vec3 size;    // length, width, height
    double yaw = 0.0;
    double speed = 0.0;

    bool operator==(const BoxAnnotation&) const = default;
};

struct FrameAnnotations {
    Pose ego_pose;
    std::vector<BoxAnnotation> objects;

    bool operator==(const FrameAnnotations&) const = default;
};

/// Boxes of every non-ego actor in the ego frame; yaw relative to the ego,
/// wrapped to (-pi, pi].
inline FrameAnnotations extract_annotations(const std::vector<Actor>& actors, const Pose& ego_pose) {
    FrameAnnotations out;
    out.ego_pose = ego_pose;
    const Pose to_ego = ego_pose.inverse();
    for (const auto& a : actors) {
        if (a.is_ego || !a.asset) continue;
        BoxAnnotation box;
        box.id = a.id;
        box.track = a.track;
        box.cls = a.asset->cls;
        box.size = a.asset->size;
        box.center = to_ego.apply(a.pose.apply({0.0, 0.0, 0.5 * a.asset->size.z}));
        box.yaw = wrap_angle(a.pose.yaw() - ego_pose.yaw());
        box.speed = a.speed;
        out.objects.push_back(box);
    }
    return out;
}

inline json annotations_json(const FrameAnnotations& a, int frame, double time) {
    json objects = json::array();
    for (const auto& o : a.objects)
        objects.push_back({{"id", o.id},
                           {"track", o.track},
                           {"class", scene::to_string(o.cls)},
                           {"center", vec3_json(o.center)},
                           {"size", vec3_json(o.size)},
                           {"yaw", o.yaw},
                           {"speed", o.speed}});
    return {{"frame", frame}, {"time", time}, {"ego_pose", pose_json(a.ego_pose)}, {"objects", objects}};
}

} // namespace oasim::render
