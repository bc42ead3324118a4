#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "oasim/error.hpp"
#include "oasim/math.hpp"

namespace oasim {

using nlohmann::json;

inline json parse_json_text(const std::string& text, const std::string& what, const std::string& code = "Format") {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail(code, what + ": " + e.what());
    }
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("NotFound", "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json_file(const std::filesystem::path& path, const std::string& code = "Format") {
    return parse_json_text(read_text_file(path), path.string(), code);
}

/// Accessors throwing Error(code) on missing or mistyped members.
inline const json& member(const json& j, const char* key, const std::string& code = "Format") {
    if (!j.is_object() || !j.contains(key)) fail(code, std::string("missing field '") + key + "'");
    return j.at(key);
}

inline double get_number(const json& j, const char* key, const std::string& code = "Format") {
    const json& v = member(j, key, code);
    if (!v.is_number()) fail(code, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

inline double get_number_or(const json& j, const char* key, double fallback, const std::string& code = "Format") {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_number(j, key, code);
}

inline std::string get_string(const json& j, const char* key, const std::string& code = "Format") {
    const json& v = member(j, key, code);
    if (!v.is_string()) fail(code, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

inline Vec3 to_vec3(const json& v, const std::string& code = "Format") {
    if (!v.is_array() || v.size() != 3) fail(code, "expected a 3-element array");
    for (const auto& e : v)
        if (!e.is_number()) fail(code, "expected numeric coordinates");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

inline Vec3 get_vec3(const json& j, const char* key, const std::string& code = "Format") { return to_vec3(member(j, key, code), code); }

inline json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Quat to_quat(const json& v, const std::string& code = "Format") {
    if (!v.is_array() || v.size() != 4) fail(code, "expected quaternion [w,x,y,z]");
    for (const auto& e : v)
        if (!e.is_number()) fail(code, "expected numeric quaternion");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
}

inline json quat_json(const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }

/// {"translation":[x,y,z], "rotation":[w,x,y,z]}; rotation defaults to identity.
inline Pose to_pose(const json& j, const std::string& code = "Format") {
    Pose p;
    p.translation = get_vec3(j, "translation", code);
    if (j.contains("rotation")) {
        const Quat q = to_quat(j.at("rotation"), code);
        if (!(q.norm() > 0.0)) fail(code, "rotation quaternion has zero norm");
        p.rotation = q.normalized();
    }
    return p;
}

inline json pose_json(const Pose& p) { return {{"translation", vec3_json(p.translation)}, {"rotation", quat_json(p.rotation)}}; }

} // namespace oasim
