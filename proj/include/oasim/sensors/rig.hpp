#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "oasim/error.hpp"
#include "oasim/json_util.hpp"
#include "oasim/math.hpp"
#include "oasim/sensors/camera.hpp"
#include "oasim/sensors/lidar.hpp"

namespace oasim::sensors {

enum class SensorKind { camera, lidar };

struct Sensor {
    std::string id;
    std::variant<CameraModel, LidarModel> model;
    Pose extrinsic;  // sensor body frame in vehicle frame

    SensorKind kind() const { return std::holds_alternative<CameraModel>(model) ? SensorKind::camera : SensorKind::lidar; }
    const CameraModel& camera() const { return std::get<CameraModel>(model); }
    const LidarModel& lidar() const { return std::get<LidarModel>(model); }
    bool operator==(const Sensor&) const = default;
};

struct SensorRig {
    std::vector<Sensor> sensors;

    const Sensor& sensor(const std::string& id) const {
        for (const auto& s : sensors)
            if (s.id == id) return s;
        fail("UnknownSensor", "rig has no sensor '" + id + "'");
    }
    bool contains(const std::string& id) const {
        for (const auto& s : sensors)
            if (s.id == id) return true;
        return false;
    }
    bool operator==(const SensorRig&) const = default;
};

inline void validate_rig(const SensorRig& rig) {
    std::set<std::string> ids;
    for (const auto& s : rig.sensors) {
        if (s.id.empty()) fail("Invalid", "sensor id must not be empty");
        if (!ids.insert(s.id).second) fail("Invalid", "duplicate sensor id '" + s.id + "'");
        if (!(std::abs(s.extrinsic.rotation.norm() - 1.0) < 1e-9)) fail("Invalid", "sensor '" + s.id + "' extrinsic rotation is not unit");
        try {
            if (s.kind() == SensorKind::camera) validate_camera(s.camera());
            else validate_lidar(s.lidar());
        } catch (const Error& e) {
            fail("Invalid", "sensor '" + s.id + "': " + e.what());
        }
    }
}

/// Shipped intrinsic presets.
inline CameraModel camera_preset(const std::string& name) {
    if (name == "wide") return {1920, 1080, 1000.0, 1000.0, 960.0, 540.0, 0.1};
    if (name == "tele") return {1920, 1080, 4000.0, 4000.0, 960.0, 540.0, 0.1};
    fail("Invalid", "unknown camera preset '" + name + "'");
}

inline LidarModel lidar_preset(const std::string& name) {
    LidarModel l;
    l.azimuth_step = deg2rad(0.2);
    l.spin_period = 0.1;
    l.max_range = 120.0;
    if (name == "spin-32") l.elevations = uniform_elevations(32, deg2rad(-25.0), deg2rad(15.0));
    else if (name == "spin-64") l.elevations = uniform_elevations(64, deg2rad(-25.0), deg2rad(15.0));
    else fail("Invalid", "unknown lidar preset '" + name + "'");
    return l;
}

/// sensor world pose = vehicle pose ∘ extrinsic. Throws UnknownSensor.
inline Pose sensor_pose_world(const SensorRig& rig, const Pose& vehicle, const std::string& sensor_id) {
    return compose(vehicle, rig.sensor(sensor_id).extrinsic);
}

namespace detail {

inline CameraModel parse_camera(const json& j) {
    CameraModel c = j.contains("preset") ? camera_preset(get_string(j, "preset", "Invalid")) : CameraModel{};
    if (j.contains("width")) c.width = j.at("width").get<int>();
    if (j.contains("height")) c.height = j.at("height").get<int>();
    c.fx = get_number_or(j, "fx", c.fx, "Invalid");
    c.fy = get_number_or(j, "fy", c.fy, "Invalid");
    c.cx = get_number_or(j, "cx", c.cx, "Invalid");
    c.cy = get_number_or(j, "cy", c.cy, "Invalid");
    c.near = get_number_or(j, "near", c.near, "Invalid");
    return c;
}

inline LidarModel parse_lidar(const json& j) {
    LidarModel l = j.contains("preset") ? lidar_preset(get_string(j, "preset", "Invalid")) : LidarModel{};
    if (j.contains("elevations_deg")) {
        l.elevations.clear();
        for (const auto& e : j.at("elevations_deg")) l.elevations.push_back(deg2rad(e.get<double>()));
    } else if (j.contains("beams")) {
        l.elevations = uniform_elevations(j.at("beams").get<int>(), deg2rad(get_number(j, "elevation_min_deg", "Invalid")),
                                          deg2rad(get_number(j, "elevation_max_deg", "Invalid")));
    }
    if (j.contains("azimuth_step_deg")) l.azimuth_step = deg2rad(get_number(j, "azimuth_step_deg", "Invalid"));
    l.spin_period = get_number_or(j, "spin_period", l.spin_period, "Invalid");
    l.max_range = get_number_or(j, "max_range", l.max_range, "Invalid");
    l.range_noise = get_number_or(j, "range_noise", l.range_noise, "Invalid");
    l.dropout = get_number_or(j, "dropout", l.dropout, "Invalid");
    return l;
}

} // namespace detail

/// Parses and validates a rig document. Angles are degrees in the file.
inline SensorRig parse_rig(const json& doc) {
    SensorRig rig;
    try {
        const json& sensors = member(doc, "sensors", "Invalid");
        if (!sensors.is_array()) fail("Invalid", "'sensors' must be an array");
        for (const auto& s : sensors) {
            Sensor sensor;
            sensor.id = get_string(s, "id", "Invalid");
            const std::string kind = get_string(s, "kind", "Invalid");
            const json model = s.contains("model") ? s.at("model") : json::object();
            if (kind == "camera") sensor.model = detail::parse_camera(model);
            else if (kind == "lidar") sensor.model = detail::parse_lidar(model);
            else fail("Invalid", "sensor '" + sensor.id + "' has unknown kind '" + kind + "'");
            if (s.contains("extrinsic")) sensor.extrinsic = to_pose(s.at("extrinsic"), "Invalid");
            rig.sensors.push_back(std::move(sensor));
        }
    } catch (const json::exception& e) {
        fail("Invalid", std::string("malformed rig: ") + e.what());
    }
    validate_rig(rig);
    return rig;
}

inline SensorRig load_rig_file(const std::filesystem::path& path) { return parse_rig(read_json_file(path, "Invalid")); }

inline json rig_json(const SensorRig& rig) {
    json sensors = json::array();
    for (const auto& s : rig.sensors) {
        json model;
        if (s.kind() == SensorKind::camera) {
            const auto& c = s.camera();
            model = {{"width", c.width}, {"height", c.height}, {"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"near", c.near}};
        } else {
            const auto& l = s.lidar();
            json elev = json::array();
            for (double e : l.elevations) elev.push_back(rad2deg(e));
            model = {{"elevations_deg", elev},     {"azimuth_step_deg", rad2deg(l.azimuth_step)},
                     {"spin_period", l.spin_period}, {"max_range", l.max_range},
                     {"range_noise", l.range_noise}, {"dropout", l.dropout}};
        }
        sensors.push_back({{"id", s.id},
                           {"kind", s.kind() == SensorKind::camera ? "camera" : "lidar"},
                           {"model", model},
                           {"extrinsic", pose_json(s.extrinsic)}});
    }
    return {{"sensors", sensors}};
}

} // namespace oasim::sensors
