#pragma once

#include <memory>
#include <vector>

#include "oasim/pipeline/scenario.hpp"
#include "oasim/render/annotations.hpp"
#include "oasim/scene/scene.hpp"
#include "oasim/traffic/traffic.hpp"

namespace oasim::pipeline {

/// Everything needed to render and annotate one instant.
struct FrameState {
    double time = 0.0;
    Pose ego_pose;
    double ego_speed = 0.0;
    traffic::World world;
    std::shared_ptr<const scene::SceneSnapshot> snapshot;
    std::vector<render::Actor> actors;
};

/// Scene placements come first, then traffic agents in id order, so
/// instance ids 1..n follow that order.
inline FrameState make_frame_state(const PreparedJob& job, traffic::World world, double t) {
    FrameState fs;
    fs.time = t;
    fs.ego_pose = job.ego.pose_at(t);
    fs.ego_speed = t > job.ego.end_time() ? 0.0 : job.ego.sample_before(t).speed;
    const auto agents = traffic::agent_placements(*job.map, world);
    fs.snapshot = std::make_shared<const scene::SceneSnapshot>(job.scene.compose_with(agents));
    const std::size_t n_static = job.scene.placements.size();
    for (std::size_t i = 0; i < n_static + world.agents.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        const scene::Instance* inst = fs.snapshot->instance(id);
        render::Actor a;
        a.id = id;
        a.asset = inst->asset;
        a.pose = inst->pose;
        if (i >= n_static) {
            const auto& agent = world.agents[i - n_static];
            a.track = agent.id;
            a.speed = agent.v;
        }
        fs.actors.push_back(std::move(a));
    }
    fs.world = std::move(world);
    return fs;
}

} // namespace oasim::pipeline
