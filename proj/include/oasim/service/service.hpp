#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "oasim/error.hpp"
#include "oasim/json_util.hpp"
#include "oasim/pipeline/scenario.hpp"
#include "oasim/service/jobs.hpp"
#include "oasim/service/session.hpp"

namespace oasim::service {

struct ServiceConfig {
    fs::path data_root = ".";
    fs::path jobs_dir;  // empty: <data_root>/jobs
    std::chrono::seconds session_ttl{30 * 60};
    unsigned job_workers = 1;
    unsigned render_threads = 0;  // 0: default_threads()
};

/// Engine facade behind the HTTP API. All references are relative to the
/// data root.
class SimService {
  public:
    explicit SimService(ServiceConfig cfg)
        : cfg_(std::move(cfg)), jobs_(cfg_.jobs_dir.empty() ? cfg_.data_root / "jobs" : cfg_.jobs_dir, cfg_.job_workers) {}

    const ServiceConfig& config() const { return cfg_; }

    /// Errors: NotFound, Invalid (with the failing invariant in the message).
    std::string create_session(const std::string& scene_ref, const std::string& map_ref, const json& rig) {
        SessionState s;
        s.scene_ref = scene_ref;
        s.map_ref = map_ref;
        s.scene = std::make_shared<const scene::SceneDescription>(scene::load_scene(resolve_ref(cfg_.data_root, scene_ref)));
        s.map = std::make_shared<const hdmap::LaneGraph>(hdmap::load_hdmap_file(resolve_ref(cfg_.data_root, map_ref)));
        if (rig.is_object()) {
            s.rig = sensors::parse_rig(rig);
            s.rig_ref = "inline";
            s.rig_inline = rig;
        } else {
            s.rig_ref = rig.get<std::string>();
            s.rig = sensors::load_rig_file(resolve_ref(cfg_.data_root, s.rig_ref));
        }
        s.free_pose = look_down_pose(s.map->centroid(), 50.0);
        rebuild(s);
        purge_idle();
        std::lock_guard lk(mu_);
        char buf[32];
        std::snprintf(buf, sizeof buf, "s%06llu", ++session_counter_);
        sessions_[buf] = std::make_shared<Session>(buf, std::move(s));
        return buf;
    }

    std::shared_ptr<Session> session(const std::string& id) {
        purge_idle();
        std::lock_guard lk(mu_);
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) fail("NotFound", "no session '" + id + "'");
        it->second->touch();
        return it->second;
    }

    std::shared_ptr<const SessionState> state(const std::string& id) { return session(id)->state(); }

    std::shared_ptr<const SessionState> set_route(const std::string& id, const std::string& start, const std::string& goal) {
        return session(id)->edit([&](SessionState& s) {
            s.map->index_of(start);
            s.map->index_of(goal);
            s.start = start;
            s.goal = goal;
            s.maneuvers.clear();
            rebuild(s);
        });
    }

    std::shared_ptr<const SessionState> apply_maneuver(const std::string& id, const hdmap::Maneuver& m) {
        return session(id)->edit([&](SessionState& s) {
            if (!s.route) fail("NoRoute", "set a route before applying maneuvers");
            s.maneuvers.push_back(m);
            rebuild(s);
        });
    }

    std::shared_ptr<const SessionState> set_traffic(const std::string& id, const std::string& preset, std::uint64_t seed,
                                                    std::optional<int> count = std::nullopt) {
        return session(id)->edit([&](SessionState& s) {
            (void)traffic::density_preset(preset, count);
            s.density = preset;
            s.agent_count = count;
            s.traffic_seed = seed;
            rebuild(s);
        });
    }

    std::shared_ptr<const SessionState> set_rig(const std::string& id, const json& rig_doc) {
        return session(id)->edit([&](SessionState& s) {
            s.rig = sensors::parse_rig(rig_doc);
            s.rig_ref = "inline";
            s.rig_inline = rig_doc;
        });
    }

    /// Renders against one published revision. Errors: OutOfRange,
    /// UnknownSensor, NotFound.
    PreviewResult preview(const std::string& id, const PreviewRequest& req) {
        const auto s = state(id);
        return render_preview(*s, req, cfg_.render_threads ? cfg_.render_threads : default_threads());
    }

    /// The job spec a session describes, with refs relative to the data root.
    pipeline::ScenarioSpec session_spec(const std::string& id) {
        const auto s = state(id);
        if (!s->route) fail("Invalid", "session has no route");
        pipeline::ScenarioSpec spec;
        spec.base_dir = cfg_.data_root;
        spec.source_ref = "session";
        spec.scene_ref = s->scene_ref;
        spec.map_ref = s->map_ref;
        spec.rig_ref = s->rig_ref;
        spec.rig_inline = s->rig_inline;
        spec.ego_start = s->start;
        spec.ego_goal = s->goal;
        spec.maneuvers = s->maneuvers;
        spec.profile = s->profile;
        spec.density = s->density;
        spec.agent_count = s->agent_count;
        spec.traffic = s->traffic_params;
        spec.seed = s->traffic_seed;
        return spec;
    }

    /// Job spec from a request document: {"scenario": ref} or
    /// {"session": id}, with optional seed / frame_rate / duration
    /// overrides.
    pipeline::ScenarioSpec job_spec(const json& body) {
        if (!body.is_object()) fail("Invalid", "job spec must be a JSON object");
        pipeline::ScenarioSpec spec;
        if (body.contains("scenario")) {
            const json& sc = body.at("scenario");
            if (sc.is_string()) spec = pipeline::load_scenario(resolve_ref(cfg_.data_root, sc.get<std::string>()));
            else if (sc.is_object()) spec = pipeline::parse_scenario(sc, cfg_.data_root);
            else fail("Invalid", "'scenario' must be a reference or a document");
        } else if (body.contains("session")) {
            spec = session_spec(get_string(body, "session", "Invalid"));
        } else {
            fail("Invalid", "job spec needs 'scenario' or 'session'");
        }
        try {
            if (body.contains("seed")) spec.seed = body.at("seed").get<std::uint64_t>();
            if (body.contains("frame_rate")) spec.frame_rate = body.at("frame_rate").get<double>();
            if (body.contains("duration")) spec.duration = body.at("duration").get<double>();
            if (body.contains("write_depth")) spec.write_depth = body.at("write_depth").get<bool>();
        } catch (const json::exception& e) {
            fail("Invalid", std::string("malformed job spec: ") + e.what());
        }
        pipeline::validate_spec(spec);
        return spec;
    }

    std::string submit_job(const json& body) { return jobs_.submit(job_spec(body)); }
    GenerationJob job_status(const std::string& id) const { return jobs_.status(id); }
    GenerationJob wait_job(const std::string& id, std::chrono::milliseconds timeout) const { return jobs_.wait(id, timeout); }

    std::size_t session_count() {
        std::lock_guard lk(mu_);
        return sessions_.size();
    }

    /// Drops sessions idle longer than the configured TTL.
    void purge_idle() {
        const auto now = std::chrono::steady_clock::now();
        std::lock_guard lk(mu_);
        for (auto it = sessions_.begin(); it != sessions_.end();) {
            if (now - it->second->last_used() > cfg_.session_ttl) it = sessions_.erase(it);
            else ++it;
        }
    }

  private:
    ServiceConfig cfg_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    unsigned long long session_counter_ = 0;
    JobRunner jobs_;
};

} // namespace oasim::service
