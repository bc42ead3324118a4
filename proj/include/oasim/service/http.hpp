#pragma once

#include <httplib.h>

#include <cstdlib>
#include <memory>
#include <sstream>
#include <string>

#include "oasim/error.hpp"
#include "oasim/json_util.hpp"
#include "oasim/service/service.hpp"

namespace oasim::service {

/// HTTP status for an engine error code.
inline int http_status(const std::string& code) {
    if (code == "NotFound" || code == "UnknownSensor" || code == "UnknownLane" || code == "UnknownAsset") return 404;
    if (code == "NoRoute" || code == "NoNeighbor" || code == "NotASuccessor" || code == "SpawnInfeasible") return 422;
    if (code == "OutputNotEmpty") return 409;
    if (code == "Internal" || code == "IoError") return 500;
    return 400;
}

inline void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, const std::string& code, const std::string& message) {
    send_json(res, http_status(code), {{"code", code}, {"message", message}});
}

inline json request_json(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    return parse_json_text(req.body, "request body", "Invalid");
}

/// Runs a handler, turning engine errors into {code, message} documents.
template <class F>
void guarded(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const Error& e) {
        send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
        send_error(res, "Invalid", e.what());
    } catch (const std::exception& e) {
        send_error(res, "Internal", e.what());
    }
}

inline double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) fail("Invalid", what + " must be a number");
    return v;
}

/// Free-camera pose from "x,y,z,qw,qx,qy,qz".
inline Pose parse_pose_param(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) v.push_back(parse_double(part, "pose component"));
    if (v.size() != 7) fail("Invalid", "pose must be x,y,z,qw,qx,qy,qz");
    const Quat q{v[3], v[4], v[5], v[6]};
    if (!(q.norm() > 0.0)) fail("Invalid", "pose rotation must be non-zero");
    return {{v[0], v[1], v[2]}, q.normalized()};
}

inline json revision_json(const SessionState& s) { return {{"revision", s.revision}}; }

/// Registers every endpoint of the API on `server`.
inline void register_routes(httplib::Server& server, SimService& svc) {
    server.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = request_json(req);
            const std::string id = svc.create_session(get_string(body, "scene", "Invalid"), get_string(body, "map", "Invalid"),
                                                      member(body, "rig", "Invalid"));
            json out = session_state_json(id, *svc.state(id));
            send_json(res, 201, out);
        });
    });
    server.Get(R"(/sessions/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, session_state_json(req.matches[1], *svc.state(req.matches[1]))); });
    });
    server.Post(R"(/sessions/([^/]+)/route)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = request_json(req);
            const auto s = svc.set_route(req.matches[1], get_string(body, "start", "Invalid"), get_string(body, "goal", "Invalid"));
            send_json(res, 200, route_geometry_json(*s));
        });
    });
    server.Post(R"(/sessions/([^/]+)/maneuver)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto s = svc.apply_maneuver(req.matches[1], pipeline::detail::parse_maneuver(request_json(req)));
            send_json(res, 200, route_geometry_json(*s));
        });
    });
    server.Post(R"(/sessions/([^/]+)/traffic)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = request_json(req);
            std::optional<int> count;
            if (body.contains("count")) count = body.at("count").get<int>();
            const auto seed = body.contains("seed") ? body.at("seed").get<std::uint64_t>() : 0;
            const auto s = svc.set_traffic(req.matches[1], get_string(body, "preset", "Invalid"), seed, count);
            json out = revision_json(*s);
            out["world"] = traffic::world_json(s->world0);
            send_json(res, 200, out);
        });
    });
    server.Put(R"(/sessions/([^/]+)/rig)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto s = svc.set_rig(req.matches[1], request_json(req));
            json out = revision_json(*s);
            out["rig"] = sensors::rig_json(s->rig);
            send_json(res, 200, out);
        });
    });
    server.Get(R"(/sessions/([^/]+)/map)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto s = svc.state(req.matches[1]);
            json out = hdmap::hdmap_json(*s->map);
            out["revision"] = s->revision;
            out["centroid"] = vec3_json(s->map->centroid());
            out["route"] = route_geometry_json(*s);
            send_json(res, 200, out);
        });
    });
    server.Get(R"(/sessions/([^/]+)/preview)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            PreviewRequest pr;
            if (req.has_param("sensor")) pr.sensor = req.get_param_value("sensor");
            if (req.has_param("t")) pr.t = parse_double(req.get_param_value("t"), "t");
            if (req.has_param("channel")) pr.channel = req.get_param_value("channel");
            if (req.has_param("pose")) pr.pose = parse_pose_param(req.get_param_value("pose"));
            const PreviewResult r = svc.preview(req.matches[1], pr);
            res.status = 200;
            res.set_header("X-Revision", std::to_string(r.revision));
            res.set_content(std::string(r.body.begin(), r.body.end()), r.content_type);
        });
    });
    server.Post("/jobs", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = svc.submit_job(request_json(req));
            send_json(res, 202, job_json(svc.job_status(id)));
        });
    });
    server.Get(R"(/jobs/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, job_json(svc.job_status(req.matches[1]))); });
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            const std::string code = res.status == 404 ? "NotFound" : "HttpError";
            res.set_content(json{{"code", code}, {"message", "HTTP " + std::to_string(res.status)}}.dump(), "application/json");
        }
    });
}

/// Data root: OASIM_DATA when set, otherwise `fallback`.
inline fs::path data_root(const fs::path& fallback) {
    if (const char* env = std::getenv("OASIM_DATA"); env && *env) return env;
    return fallback;
}

} // namespace oasim::service
